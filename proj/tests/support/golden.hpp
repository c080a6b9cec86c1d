#pragma once

// Hand-enumerated event chains on small constant-delay clusters. Every
// expected timestamp is written out from the CPU demands in oracle::Demands
// and the link delays; the chains were derived by walking the transaction
// manager rules event by event.

#include "oracles.hpp"

#include <string>
#include <vector>

namespace golden {

using dgsim::CpuActivity;
using dgsim::EventKind;
using oracle::cpu;
using oracle::Demands;
using oracle::ev;
using oracle::Step;

struct Scenario {
    std::string name;
    std::vector<dgsim::TraceEntry> trace;
    std::vector<Step> expected;
    std::vector<std::string> leftovers;
    std::string mismatch;
};

inline Scenario finish(std::string name, dgsim::Simulation& sim, std::vector<Step> expected) {
    sim.kernel().record_trace(true);
    sim.run();
    Scenario s;
    s.name = std::move(name);
    s.trace = sim.kernel().trace();
    s.expected = std::move(expected);
    s.leftovers = sim.leftovers();
    s.mismatch = oracle::compare_trace(s.trace, s.expected);
    return s;
}

template <typename Build>
Scenario with_clients(const std::string& name, dgsim::RunConfig cfg, Build build) {
    // Directory lookups need the ring before the clients exist.
    dgsim::HashRing ring(cfg.servers, cfg.replication, cfg.vnodes);
    dgsim::OwnerDirectory dir(ring, cfg.workload.dataset_size);
    std::vector<Step> expected;
    std::vector<dgsim::ClientBinding> clients = build(dir, cfg, expected);
    dgsim::Simulation sim(cfg, 7, std::move(clients));
    return finish(name, sim, std::move(expected));
}

inline std::vector<dgsim::ClientBinding> one_client(dgsim::ServerId server, std::vector<dgsim::TxScript> s) {
    std::vector<dgsim::ClientBinding> v;
    v.push_back({server, oracle::scripts(std::move(s))});
    return v;
}

// (a) local get, 2 servers, r=1: begin, get on a key owned by the coordinator, commit.
inline Scenario local_get() {
    return with_clients("local get", oracle::golden_config(2, 1), [](auto& dir, auto&, auto& x) {
        dgsim::Key k = oracle::key_owned_by(dir, {0});
        const double b = Demands::begin, g = b + Demands::get, p = g + Demands::prepare;
        const dgsim::ObjectId c = 2;
        x = {ev(0, c, 0, EventKind::Begin),
             cpu(b, 0, EventKind::Begin, CpuActivity::TxBegin),
             ev(b, 0, c, EventKind::ClientReply),
             ev(b, c, 0, EventKind::Get),
             cpu(g, 0, EventKind::Get, CpuActivity::LocalTxGet),
             ev(g, 0, c, EventKind::ClientReply),
             ev(g, c, 0, EventKind::CommitRequest),
             cpu(p, 0, EventKind::CommitRequest, CpuActivity::TxPrepare),
             ev(p, 0, c, EventKind::ClientReply)};
        return one_client(0, {oracle::reads({k})});
    });
}

// (b) remote get, 3 servers, r=2, both owners remote with 1 ms and 5 ms links.
// The 1 ms owner unlocks the client; the 5 ms reply only retires the op.
inline Scenario remote_get_two_owners() {
    auto cfg = oracle::golden_config(3, 2);
    dgsim::HashRing ring(3, 2, cfg.vnodes);
    dgsim::OwnerDirectory dir(ring, cfg.workload.dataset_size);
    dgsim::Key k = 0;
    dgsim::ServerId fast = 1, slow = 2;
    for (;; ++k) {
        auto o = dir.owners(k);
        if (!dir.is_owner(0, k)) {
            fast = o[0];
            slow = o[1];
            break;
        }
    }
    cfg.network.options.link_delays = {{{0, fast}, 1e-3}, {{fast, 0}, 1e-3}, {{0, slow}, 5e-3}, {{slow, 0}, 5e-3}};
    return with_clients("remote get, two owners", cfg, [&](auto&, auto&, auto& x) {
        const double b = Demands::begin, g = b + Demands::get, s = g + Demands::send_remote;
        const double f_in = s + 1e-3, f_cpu = f_in + Demands::from_remote, f_back = f_cpu + 1e-3;
        const double p = f_back + Demands::prepare;
        const double s_in = s + 5e-3, s_cpu = s_in + Demands::from_remote, s_back = s_cpu + 5e-3;
        const dgsim::ObjectId c = 3;
        x = {ev(0, c, 0, EventKind::Begin),
             cpu(b, 0, EventKind::Begin, CpuActivity::TxBegin),
             ev(b, 0, c, EventKind::ClientReply),
             ev(b, c, 0, EventKind::Get),
             cpu(g, 0, EventKind::Get, CpuActivity::LocalTxGet),
             cpu(s, 0, EventKind::Get, CpuActivity::TxSendRemoteTxGet),
             ev(f_in, 0, fast, EventKind::RemoteGet),
             cpu(f_cpu, fast, EventKind::RemoteGet, CpuActivity::LocalTxGetFromRemote),
             ev(f_back, fast, 0, EventKind::ReadReply),
             ev(f_back, 0, c, EventKind::ClientReply),
             ev(f_back, c, 0, EventKind::CommitRequest),
             cpu(p, 0, EventKind::CommitRequest, CpuActivity::TxPrepare),
             ev(p, 0, c, EventKind::ClientReply),
             ev(s_in, 0, slow, EventKind::RemoteGet),
             cpu(s_cpu, slow, EventKind::RemoteGet, CpuActivity::LocalTxGetFromRemote),
             ev(s_back, slow, 0, EventKind::ReadReply)};
        return one_client(0, {oracle::reads({k})});
    });
}

// (b') remote get with a single remote owner, 2 servers, r=1: reply latency is
// cpu + delay out + remote cpu + delay back.
inline Scenario remote_get_single_owner() {
    return with_clients("remote get, one owner", oracle::golden_config(2, 1), [](auto& dir, auto&, auto& x) {
        dgsim::Key k = oracle::key_owned_by(dir, {1});
        const double b = Demands::begin, g = b + Demands::get, s = g + Demands::send_remote;
        const double in = s + 1e-3, rc = in + Demands::from_remote, back = rc + 1e-3, p = back + Demands::prepare;
        const dgsim::ObjectId c = 2;
        x = {ev(0, c, 0, EventKind::Begin),
             cpu(b, 0, EventKind::Begin, CpuActivity::TxBegin),
             ev(b, 0, c, EventKind::ClientReply),
             ev(b, c, 0, EventKind::Get),
             cpu(g, 0, EventKind::Get, CpuActivity::LocalTxGet),
             cpu(s, 0, EventKind::Get, CpuActivity::TxSendRemoteTxGet),
             ev(in, 0, 1, EventKind::RemoteGet),
             cpu(rc, 1, EventKind::RemoteGet, CpuActivity::LocalTxGetFromRemote),
             ev(back, 1, 0, EventKind::ReadReply),
             ev(back, 0, c, EventKind::ClientReply),
             ev(back, c, 0, EventKind::CommitRequest),
             cpu(p, 0, EventKind::CommitRequest, CpuActivity::TxPrepare),
             ev(p, 0, c, EventKind::ClientReply)};
        return one_client(0, {oracle::reads({k})});
    });
}

// (c) read-only commit, 2 servers, r=2: the second get of the same key is
// served from the read set, and the commit needs no prepare round.
inline Scenario read_only_commit() {
    return with_clients("read-only commit", oracle::golden_config(2, 2), [](auto&, auto&, auto& x) {
        const dgsim::Key k = 5;
        const double b = Demands::begin, g1 = b + Demands::get, g2 = g1 + Demands::get, p = g2 + Demands::prepare;
        const dgsim::ObjectId c = 2;
        x = {ev(0, c, 0, EventKind::Begin),
             cpu(b, 0, EventKind::Begin, CpuActivity::TxBegin),
             ev(b, 0, c, EventKind::ClientReply),
             ev(b, c, 0, EventKind::Get),
             cpu(g1, 0, EventKind::Get, CpuActivity::LocalTxGet),
             ev(g1, 0, c, EventKind::ClientReply),
             ev(g1, c, 0, EventKind::Get),
             cpu(g2, 0, EventKind::Get, CpuActivity::LocalTxGet),
             ev(g2, 0, c, EventKind::ClientReply),
             ev(g2, c, 0, EventKind::CommitRequest),
             cpu(p, 0, EventKind::CommitRequest, CpuActivity::TxPrepare),
             ev(p, 0, c, EventKind::ClientReply)};
        return one_client(0, {oracle::reads({k, k})});
    });
}

// (d) 2-participant successful prepare, 2 servers, r=1, primary mode.
inline Scenario two_participant_commit() {
    return with_clients("2-participant commit", oracle::golden_config(2, 1), [](auto& dir, auto&, auto& x) {
        dgsim::Key ka = oracle::key_owned_by(dir, {0});
        dgsim::Key kb = oracle::key_owned_by(dir, {1});
        const double b = Demands::begin, u1 = b + Demands::put, u2 = u1 + Demands::put, p = u2 + Demands::prepare;
        const double rp = p + 1e-3, rpc = rp + Demands::prepare, reply = rpc + 1e-3;
        const double fin = reply + Demands::final_commit, remote_fc = reply + 1e-3,
                     remote_fc_cpu = remote_fc + Demands::final_commit;
        const dgsim::ObjectId c = 2;
        x = {ev(0, c, 0, EventKind::Begin),
             cpu(b, 0, EventKind::Begin, CpuActivity::TxBegin),
             ev(b, 0, c, EventKind::ClientReply),
             ev(b, c, 0, EventKind::Put),
             cpu(u1, 0, EventKind::Put, CpuActivity::LocalTxPut),
             ev(u1, 0, c, EventKind::ClientReply),
             ev(u1, c, 0, EventKind::Put),
             cpu(u2, 0, EventKind::Put, CpuActivity::LocalTxPut),
             ev(u2, 0, c, EventKind::ClientReply),
             ev(u2, c, 0, EventKind::CommitRequest),
             cpu(p, 0, EventKind::CommitRequest, CpuActivity::TxPrepare),
             ev(p, 0, 0, EventKind::PrepareReply),
             ev(rp, 0, 1, EventKind::RemotePrepare),
             cpu(rpc, 1, EventKind::RemotePrepare, CpuActivity::TxPrepare),
             ev(reply, 1, 0, EventKind::PrepareReply),
             ev(reply, 0, 0, EventKind::FinalCommit),
             cpu(fin, 0, EventKind::PrepareReply, CpuActivity::DistributedFinalTxCommit),
             cpu(fin, 0, EventKind::FinalCommit, CpuActivity::DistributedFinalTxCommit),
             ev(fin, 0, c, EventKind::ClientReply),
             ev(remote_fc, 0, 1, EventKind::FinalCommit),
             cpu(remote_fc_cpu, 1, EventKind::FinalCommit, CpuActivity::DistributedFinalTxCommit)};
        return one_client(0, {oracle::writes({ka, kb})});
    });
}

// (e) one negative prepare, 2 servers, r=1, timestamp protocol. T1 (client 3
// at server 1) commits kb first and moves DOT[kb] past T2's timestamp; T2
// (client 2 at server 0) writes ka and kb, is rejected at server 1 and aborts.
inline Scenario negative_prepare_abort() {
    auto cfg = oracle::golden_config(2, 1);
    cfg.protocol = "ts2pc";
    return with_clients("1-negative prepare abort", cfg, [](auto& dir, auto&, auto& x) {
        dgsim::Key ka = oracle::key_owned_by(dir, {0});
        dgsim::Key kb = oracle::key_owned_by(dir, {1});
        const dgsim::ObjectId c0 = 2, c1 = 3;
        const double b = Demands::begin;
        const double u1 = b + Demands::put;                     // both first puts
        const double t1_commit = u1 + Demands::prepare;         // T1 prepare stage at server 1
        const double u2 = u1 + Demands::put;                    // T2 second put
        const double t2_commit = u2 + Demands::prepare;         // T2 prepare stage at server 0
        const double t1_fin = t1_commit + Demands::final_commit;
        const double rp = t2_commit + 1e-3, rpc = rp + Demands::prepare, nack = rpc + 1e-3;
        const double abort_cpu = nack + Demands::abort, remote_abort = nack + 1e-3,
                     remote_abort_cpu = remote_abort + Demands::abort;
        x = {ev(0, c0, 0, EventKind::Begin),
             ev(0, c1, 1, EventKind::Begin),
             cpu(b, 0, EventKind::Begin, CpuActivity::TxBegin),
             cpu(b, 1, EventKind::Begin, CpuActivity::TxBegin),
             ev(b, 0, c0, EventKind::ClientReply),
             ev(b, 1, c1, EventKind::ClientReply),
             ev(b, c0, 0, EventKind::Put),
             ev(b, c1, 1, EventKind::Put),
             cpu(u1, 0, EventKind::Put, CpuActivity::LocalTxPut),
             cpu(u1, 1, EventKind::Put, CpuActivity::LocalTxPut),
             ev(u1, 0, c0, EventKind::ClientReply),
             ev(u1, 1, c1, EventKind::ClientReply),
             ev(u1, c0, 0, EventKind::Put),
             ev(u1, c1, 1, EventKind::CommitRequest),
             cpu(u2, 0, EventKind::Put, CpuActivity::LocalTxPut),
             ev(u2, 0, c0, EventKind::ClientReply),
             ev(u2, c0, 0, EventKind::CommitRequest),
             cpu(t1_commit, 1, EventKind::CommitRequest, CpuActivity::TxPrepare),
             ev(t1_commit, 1, 1, EventKind::PrepareReply),
             ev(t1_commit, 1, 1, EventKind::FinalCommit),
             cpu(t2_commit, 0, EventKind::CommitRequest, CpuActivity::TxPrepare),
             ev(t2_commit, 0, 0, EventKind::PrepareReply),
             cpu(t1_fin, 1, EventKind::PrepareReply, CpuActivity::DistributedFinalTxCommit),
             cpu(t1_fin, 1, EventKind::FinalCommit, CpuActivity::DistributedFinalTxCommit),
             ev(t1_fin, 1, c1, EventKind::ClientReply),
             ev(rp, 0, 1, EventKind::RemotePrepare),
             cpu(rpc, 1, EventKind::RemotePrepare, CpuActivity::TxPrepare),
             ev(nack, 1, 0, EventKind::PrepareReply),
             ev(nack, 0, 0, EventKind::Abort),
             cpu(abort_cpu, 0, EventKind::PrepareReply, CpuActivity::TxAbort),
             cpu(abort_cpu, 0, EventKind::Abort, CpuActivity::TxAbort),
             ev(abort_cpu, 0, c0, EventKind::ClientReply),
             ev(remote_abort, 0, 1, EventKind::Abort),
             cpu(remote_abort_cpu, 1, EventKind::Abort, CpuActivity::TxAbort)};
        std::vector<dgsim::ClientBinding> v;
        v.push_back({0, oracle::scripts({oracle::writes({ka, kb})})});
        v.push_back({1, oracle::scripts({oracle::writes({kb})})});
        return v;
    });
}

// (f) primary mode, 2 servers, r=2: the coordinator is the non-primary owner
// of the written key; the primary prepares, commits and propagates the commit
// back to the non-primary owner.
inline Scenario primary_propagation() {
    return with_clients("primary-mode propagation", oracle::golden_config(2, 2), [](auto& dir, auto&, auto& x) {
        dgsim::Key k = oracle::key_owned_by(dir, {1, 0});
        const double b = Demands::begin, u = b + Demands::put, p = u + Demands::prepare;
        const double rp = p + 1e-3, rpc = rp + Demands::prepare, reply = rpc + 1e-3;
        const double fin = reply + Demands::final_commit, fc = reply + 1e-3, fcc = fc + Demands::final_commit;
        const double prop = fcc + 1e-3, propc = prop + Demands::final_commit;
        const dgsim::ObjectId c = 2;
        x = {ev(0, c, 0, EventKind::Begin),
             cpu(b, 0, EventKind::Begin, CpuActivity::TxBegin),
             ev(b, 0, c, EventKind::ClientReply),
             ev(b, c, 0, EventKind::Put),
             cpu(u, 0, EventKind::Put, CpuActivity::LocalTxPut),
             ev(u, 0, c, EventKind::ClientReply),
             ev(u, c, 0, EventKind::CommitRequest),
             cpu(p, 0, EventKind::CommitRequest, CpuActivity::TxPrepare),
             ev(rp, 0, 1, EventKind::RemotePrepare),
             cpu(rpc, 1, EventKind::RemotePrepare, CpuActivity::TxPrepare),
             ev(reply, 1, 0, EventKind::PrepareReply),
             cpu(fin, 0, EventKind::PrepareReply, CpuActivity::DistributedFinalTxCommit),
             ev(fin, 0, c, EventKind::ClientReply),
             ev(fc, 0, 1, EventKind::FinalCommit),
             cpu(fcc, 1, EventKind::FinalCommit, CpuActivity::DistributedFinalTxCommit),
             ev(prop, 1, 0, EventKind::FinalCommit),
             cpu(propc, 0, EventKind::FinalCommit, CpuActivity::DistributedFinalTxCommit)};
        return one_client(0, {oracle::writes({k})});
    });
}

inline std::vector<Scenario> all() {
    return {local_get(),          remote_get_two_owners(),  remote_get_single_owner(), read_only_commit(),
            two_participant_commit(), negative_prepare_abort(), primary_propagation()};
}

} // namespace golden
