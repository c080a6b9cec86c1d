#include "dgsim/client.hpp"

#include "dgsim/errors.hpp"

#include <algorithm>

namespace dgsim {

ClientOptions ClientOptions::from(const WorkloadSpec& spec, std::uint32_t value_size) {
    ClientOptions o;
    o.system = spec.system;
    o.think = spec.think;
    o.think_time = spec.think_time;
    o.arrival_rate = spec.arrival_rate;
    o.retry_aborted = spec.retry_aborted;
    o.redraw_on_retry = spec.redraw_on_retry;
    o.retry_backoff = spec.retry_backoff;
    o.value_size = value_size;
    return o;
}

Client::Client(ObjectId server, std::unique_ptr<ScriptSource> source, ClientOptions options,
               RandomStream workload_rng, RandomStream think_rng)
    : server_(server), source_(std::move(source)), options_(options),
      workload_rng_(std::move(workload_rng)), think_rng_(std::move(think_rng)) {}

void Client::start(Kernel& kernel) {
    if (options_.system == SystemKind::Closed) {
        next_script(kernel);
    } else {
        wake_at(kernel, kernel.now() + think_rng_.exponential(1.0 / options_.arrival_rate), Payload{});
    }
}

void Client::handle(const SimEvent& event, Kernel& kernel) {
    switch (event.kind) {
    case EventKind::ClientReply: on_reply(event, kernel); break;
    case EventKind::ClientWake: on_wake(event, kernel); break;
    default: throw ModelError("client received unexpected event " + std::string(to_string(event.kind)));
    }
}

void Client::send(Kernel& kernel, EventKind kind, Payload payload) {
    payload.sent_at = kernel.now();
    kernel.schedule(SimEvent{kernel.now(), self_, server_, kind, std::move(payload)});
}

void Client::wake_at(Kernel& kernel, SimTime at, Payload payload) {
    kernel.schedule(SimEvent{at, self_, self_, EventKind::ClientWake, std::move(payload)});
}

void Client::next_script(Kernel& kernel) {
    if (draining_ || exhausted_) return;
    auto script = source_->next(workload_rng_);
    if (!script) {
        exhausted_ = true;
        return;
    }
    launch(std::move(*script), 0, kernel);
}

void Client::launch(TxScript script, std::uint32_t attempt, Kernel& kernel) {
    std::uint64_t id = next_request_++;
    Request& r = in_flight_[id];
    r.script = std::move(script);
    r.attempt = attempt;
    max_in_flight_ = std::max(max_in_flight_, in_flight_.size());
    ++begins_;
    Payload p;
    p.op = id;
    p.attempt = attempt;
    send(kernel, EventKind::Begin, std::move(p));
}

void Client::issue(std::uint64_t request, Request& r, Kernel& kernel) {
    Payload p;
    p.op = request;
    p.tx = r.tx;
    p.attempt = r.attempt;
    if (r.next_op < r.script.ops.size()) {
        const ScriptOp& op = r.script.ops[r.next_op];
        p.key = op.key;
        p.value_size = options_.value_size;
        send(kernel, op.kind == OpKind::Get ? EventKind::Get : EventKind::Put, std::move(p));
    } else {
        send(kernel, EventKind::CommitRequest, std::move(p));
    }
}

void Client::on_reply(const SimEvent& event, Kernel& kernel) {
    const Payload& p = event.payload;
    auto it = in_flight_.find(p.op);
    if (it == in_flight_.end()) throw ModelError("client reply for unknown request");
    Request& r = it->second;
    switch (p.reply) {
    case ReplyKind::BeginAck:
        r.tx = p.tx;
        issue(it->first, r, kernel);
        return;
    case ReplyKind::OpAck:
        ++r.next_op;
        issue(it->first, r, kernel);
        return;
    case ReplyKind::Committed: {
        ++commits_;
        in_flight_.erase(it);
        after_terminal(kernel);
        return;
    }
    case ReplyKind::Aborted: {
        ++aborts_;
        TxScript script = std::move(r.script);
        std::uint32_t attempt = r.attempt + 1;
        in_flight_.erase(it);
        if (options_.retry_aborted && !draining_) {
            if (options_.redraw_on_retry) script = source_->redraw(script, workload_rng_);
            if (options_.retry_backoff > 0.0) {
                std::uint64_t token = next_retry_++;
                retries_.emplace(token, std::make_pair(std::move(script), attempt));
                Payload w;
                w.op = token;
                w.reply = ReplyKind::Aborted;
                wake_at(kernel, kernel.now() + options_.retry_backoff, std::move(w));
            } else {
                launch(std::move(script), attempt, kernel);
            }
            return;
        }
        after_terminal(kernel);
        return;
    }
    case ReplyKind::None: break;
    }
    throw ModelError("client reply without a reply kind");
}

void Client::after_terminal(Kernel& kernel) {
    if (options_.system != SystemKind::Closed || draining_) return;
    if (options_.think_time <= 0.0) {
        next_script(kernel);
        return;
    }
    double t = options_.think == ThinkDistribution::Constant ? options_.think_time
                                                              : think_rng_.exponential(options_.think_time);
    wake_at(kernel, kernel.now() + t, Payload{});
}

void Client::on_wake(const SimEvent& event, Kernel& kernel) {
    if (event.payload.reply == ReplyKind::Aborted) {
        auto it = retries_.find(event.payload.op);
        if (it == retries_.end()) throw ModelError("retry wake for unknown token");
        auto [script, attempt] = std::move(it->second);
        retries_.erase(it);
        if (draining_) return;
        launch(std::move(script), attempt, kernel);
        return;
    }
    if (options_.system == SystemKind::Open) {
        if (draining_ || exhausted_) return;
        next_script(kernel);
        if (!exhausted_)
            wake_at(kernel, kernel.now() + think_rng_.exponential(1.0 / options_.arrival_rate), Payload{});
        return;
    }
    next_script(kernel);
}

} // namespace dgsim
