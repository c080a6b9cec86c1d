#pragma once

#include "dgsim/types.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace dgsim {

/// Name of the key/vnode hash, recorded in reports.
inline constexpr std::string_view kPlacementHashName = "fnv1a64+fmix64";

/// FNV-1a over the little-endian bytes of `value`, finished with the
/// murmur3 64-bit avalanche step.
std::uint64_t placement_hash(std::uint64_t value) noexcept;

/// Ordered replica holders of one key; the first entry is the primary.
class OwnerSet {
public:
    OwnerSet() = default;
    explicit OwnerSet(std::vector<ServerId> owners) : owners_(std::move(owners)) {}

    ServerId primary() const { return owners_.front(); }
    std::span<const ServerId> owners() const noexcept { return owners_; }
    std::size_t size() const noexcept { return owners_.size(); }
    bool contains(ServerId s) const noexcept;

private:
    std::vector<ServerId> owners_;
};

/// Consistent-hashing ring with virtual nodes. Immutable after construction.
class HashRing {
public:
    /// Servers 0..servers-1.
    HashRing(std::uint32_t servers, std::uint32_t replication, std::uint32_t vnodes = 64);
    /// An explicit membership (used to study removal of a server).
    HashRing(std::vector<ServerId> members, std::uint32_t replication, std::uint32_t vnodes = 64);

    OwnerSet owners(Key key) const;
    bool is_owner(ServerId server, Key key) const;
    bool is_primary(ServerId server, Key key) const;

    std::uint32_t replication() const noexcept { return replication_; }
    std::uint32_t vnodes() const noexcept { return vnodes_; }
    std::span<const ServerId> members() const noexcept { return members_; }

private:
    struct Point {
        std::uint64_t hash;
        ServerId server;
    };

    std::vector<ServerId> members_;
    std::uint32_t replication_;
    std::uint32_t vnodes_;
    std::vector<Point> ring_;
};

/// Owner sets of the dense key space 0..keys-1, precomputed from a ring.
class OwnerDirectory {
public:
    OwnerDirectory(const HashRing& ring, std::uint64_t keys);

    std::span<const ServerId> owners(Key key) const noexcept {
        return {flat_.data() + key * replication_, replication_};
    }
    ServerId primary(Key key) const noexcept { return flat_[key * replication_]; }
    bool is_owner(ServerId server, Key key) const noexcept;
    bool is_primary(ServerId server, Key key) const noexcept { return primary(key) == server; }

    /// Number of key copies stored on `server`.
    std::uint64_t copies(ServerId server) const noexcept {
        return server < copies_.size() ? copies_[server] : 0;
    }
    std::uint64_t keys() const noexcept { return keys_; }
    std::uint32_t replication() const noexcept { return replication_; }

private:
    std::uint64_t keys_;
    std::uint32_t replication_;
    std::vector<ServerId> flat_;
    std::vector<std::uint64_t> copies_;
};

} // namespace dgsim
