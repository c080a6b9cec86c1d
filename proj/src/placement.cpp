#include "dgsim/placement.hpp"

#include "dgsim/errors.hpp"

#include <algorithm>
#include <string>

namespace dgsim {

namespace {

std::uint64_t fnv1a(const unsigned char* bytes, std::size_t n) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fmix64(std::uint64_t k) noexcept {
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdULL;
    k ^= k >> 33;
    k *= 0xc4ceb9fe1a85ec53ULL;
    k ^= k >> 33;
    return k;
}

std::uint64_t hash_bytes_le(std::uint64_t value) noexcept {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(value >> (8 * i));
    return fmix64(fnv1a(b, 8));
}

std::vector<ServerId> iota_members(std::uint32_t n) {
    std::vector<ServerId> m(n);
    for (std::uint32_t i = 0; i < n; ++i) m[i] = i;
    return m;
}

} // namespace

std::uint64_t placement_hash(std::uint64_t value) noexcept { return hash_bytes_le(value); }

bool OwnerSet::contains(ServerId s) const noexcept {
    return std::find(owners_.begin(), owners_.end(), s) != owners_.end();
}

HashRing::HashRing(std::uint32_t servers, std::uint32_t replication, std::uint32_t vnodes)
    : HashRing(iota_members(servers), replication, vnodes) {}

HashRing::HashRing(std::vector<ServerId> members, std::uint32_t replication, std::uint32_t vnodes)
    : members_(std::move(members)), replication_(replication), vnodes_(vnodes) {
    if (members_.empty()) throw ConfigError("cluster.servers", "", "server count must be positive");
    if (replication_ == 0)
        throw ConfigError("cluster.replication", "", "replication degree must be positive");
    if (replication_ > members_.size())
        throw ConfigError("cluster.replication", "", "replication degree exceeds server count");
    if (vnodes_ == 0) throw ConfigError("cluster.vnodes", "", "virtual nodes must be positive");

    ring_.reserve(members_.size() * vnodes_);
    for (ServerId s : members_)
        for (std::uint32_t v = 0; v < vnodes_; ++v)
            ring_.push_back({hash_bytes_le((static_cast<std::uint64_t>(s) << 32) | v), s});
    std::sort(ring_.begin(), ring_.end(), [](const Point& a, const Point& b) {
        return a.hash != b.hash ? a.hash < b.hash : a.server < b.server;
    });
}

OwnerSet HashRing::owners(Key key) const {
    const std::uint64_t h = hash_bytes_le(key);
    auto it = std::lower_bound(ring_.begin(), ring_.end(), h,
                               [](const Point& p, std::uint64_t v) { return p.hash < v; });
    std::vector<ServerId> out;
    out.reserve(replication_);
    for (std::size_t step = 0; step < ring_.size() && out.size() < replication_; ++step) {
        if (it == ring_.end()) it = ring_.begin();
        if (std::find(out.begin(), out.end(), it->server) == out.end()) out.push_back(it->server);
        ++it;
    }
    return OwnerSet(std::move(out));
}

bool HashRing::is_owner(ServerId server, Key key) const { return owners(key).contains(server); }

bool HashRing::is_primary(ServerId server, Key key) const { return owners(key).primary() == server; }

OwnerDirectory::OwnerDirectory(const HashRing& ring, std::uint64_t keys)
    : keys_(keys), replication_(ring.replication()) {
    flat_.reserve(keys * replication_);
    ServerId max_id = 0;
    for (ServerId s : ring.members()) max_id = std::max(max_id, s);
    copies_.assign(max_id + 1, 0);
    for (Key k = 0; k < keys; ++k) {
        const OwnerSet set = ring.owners(k);
        for (ServerId s : set.owners()) {
            flat_.push_back(s);
            ++copies_[s];
        }
    }
}

bool OwnerDirectory::is_owner(ServerId server, Key key) const noexcept {
    for (ServerId s : owners(key))
        if (s == server) return true;
    return false;
}

} // namespace dgsim
