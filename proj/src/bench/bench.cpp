#include "choreo/bench/bench.hpp"

#include "choreo/analysis/monitor_file.hpp"
#include "choreo/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>

namespace choreo
{

const char* to_string(LoadProfile p) noexcept
{
    switch (p)
    {
    case LoadProfile::Steady: return "steady";
    case LoadProfile::Pulse: return "pulse";
    case LoadProfile::Burst: return "burst";
    }
    return "?";
}

std::optional<LoadProfile> parse_load_profile(std::string_view text) noexcept
{
    for (auto p : {LoadProfile::Steady, LoadProfile::Pulse, LoadProfile::Burst})
        if (text == to_string(p))
            return p;
    return std::nullopt;
}

LoadSchedule gen_load(LoadProfile profile, std::size_t n, std::size_t t, std::uint64_t, std::size_t bursts)
{
    if (n == 0 || t == 0)
        throw Error("load schedule needs n >= 1 and t >= 1");
    LoadSchedule out;
    out.spawn_step.reserve(n);
    const auto last = static_cast<std::uint64_t>(t - 1);
    switch (profile)
    {
    case LoadProfile::Steady:
        for (std::size_t i = 0; i < n; ++i)
            out.spawn_step.push_back(static_cast<std::uint64_t>(i * t / n));
        break;
    case LoadProfile::Pulse:
        for (std::size_t i = 0; i < n; ++i)
        {
            const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
            const double x = u < 0.5 ? std::sqrt(u / 2) : 1.0 - std::sqrt((1.0 - u) / 2);
            const auto s = static_cast<std::uint64_t>(std::floor(x * static_cast<double>(t)));
            out.spawn_step.push_back(std::min(s, last));
        }
        break;
    case LoadProfile::Burst:
    {
        const std::size_t k = std::max<std::size_t>(bursts, 1);
        for (std::size_t b = 0; b < k; ++b)
        {
            const std::size_t size = (b + 1) * n / k - b * n / k;
            const auto at = static_cast<std::uint64_t>(b * t / k);
            out.spawn_step.insert(out.spawn_step.end(), size, at);
        }
        break;
    }
    }
    return out;
}

namespace
{

class MasterBehavior : public Behavior
{
  public:
    MasterBehavior(std::shared_ptr<const LoadSchedule> load, std::size_t requests)
        : load_(std::move(load)), requests_(requests)
    {
    }

    bool ready(const Mailbox& mailbox) const override
    {
        return !mailbox.empty() || !pending_.empty() || next_ < load_->spawn_step.size() || done();
    }

    void step(ProcessContext& ctx) override
    {
        const auto& at = load_->spawn_step;
        if (next_ < at.size() && at[next_] <= tick_)
        {
            workers_.push_back(ctx.fork(kWorkerSig));
            sent_.push_back(0);
            pending_.push_back(next_++);
        }
        else if (!pending_.empty())
        {
            const auto w = pending_.front();
            pending_.pop_front();
            const auto id = static_cast<std::int64_t>(w * requests_ + sent_[w]++);
            ctx.send(workers_[w], SystemMessage{"req", id});
        }
        else if (!ctx.mailbox().empty())
        {
            const auto m = ctx.receive_any();
            const auto* reply = std::get_if<SystemMessage>(&m);
            if (!reply || reply->tag != "rep")
                throw Error("master received an unexpected message");
            ++replies_;
            const auto w = static_cast<std::size_t>(reply->value) / requests_;
            if (sent_.at(w) < requests_)
                pending_.push_back(w);
        }
        else if (next_ < at.size())
            ++tick_;
        else
            ctx.exit();
    }

    std::unique_ptr<Behavior> clone() const override { return std::make_unique<MasterBehavior>(*this); }

    void fingerprint(std::string& out) const override
    {
        out += "M" + std::to_string(tick_) + "," + std::to_string(next_) + "," + std::to_string(replies_) + ",";
        for (auto w : pending_)
            out += std::to_string(w) + ".";
        for (auto s : sent_)
            out += std::to_string(s) + ":";
    }

  private:
    bool done() const { return next_ == load_->spawn_step.size() && replies_ == load_->spawn_step.size() * requests_; }

    std::shared_ptr<const LoadSchedule> load_;
    std::size_t requests_;
    std::uint64_t tick_ = 0;
    std::size_t next_ = 0;
    std::size_t replies_ = 0;
    std::vector<Pid> workers_;
    std::vector<std::size_t> sent_;
    std::deque<std::size_t> pending_;
};

class WorkerBehavior : public Behavior
{
  public:
    WorkerBehavior(Pid master, std::size_t requests) : master_(master), requests_(requests) {}

    bool ready(const Mailbox& mailbox) const override { return reply_ || answered_ == requests_ || !mailbox.empty(); }

    void step(ProcessContext& ctx) override
    {
        if (reply_)
        {
            ctx.send(master_, SystemMessage{"rep", *reply_});
            reply_.reset();
            ++answered_;
        }
        else if (answered_ == requests_)
            ctx.exit();
        else
        {
            const auto m = ctx.receive_any();
            const auto* req = std::get_if<SystemMessage>(&m);
            if (!req || req->tag != "req")
                throw Error("worker received an unexpected message");
            reply_ = req->value;
        }
    }

    std::unique_ptr<Behavior> clone() const override { return std::make_unique<WorkerBehavior>(*this); }

    void fingerprint(std::string& out) const override
    {
        out += "W" + std::to_string(answered_) + (reply_ ? "r" + std::to_string(*reply_) : std::string{});
    }

  private:
    Pid master_;
    std::size_t requests_;
    std::size_t answered_ = 0;
    std::optional<std::int64_t> reply_;
};

class BootBehavior : public Behavior
{
  public:
    bool ready(const Mailbox&) const override { return true; }

    void step(ProcessContext& ctx) override
    {
        if (forked_)
            ctx.exit();
        else
        {
            ctx.fork(kMasterSig);
            forked_ = true;
        }
    }

    std::unique_ptr<Behavior> clone() const override { return std::make_unique<BootBehavior>(*this); }
    void fingerprint(std::string& out) const override { out += forked_ ? "B1" : "B0"; }

  private:
    bool forked_ = false;
};

std::vector<Action> worker_chain(std::size_t r)
{
    std::vector<Action> chain;
    for (std::size_t i = 0; i < r; ++i)
    {
        chain.push_back(Action::Rcv);
        chain.push_back(Action::Snd);
    }
    chain.push_back(Action::Ext);
    return chain;
}

/// Collects the counters that need the log.
class MetricsSink : public LogSink
{
  public:
    explicit MetricsSink(std::set<Signature> monitored) : monitored_(std::move(monitored)) {}

    bool wants(EntryKind k) const override
    {
        return k == EntryKind::Send || k == EntryKind::Consume || k == EntryKind::Emit || k == EntryKind::Spawn;
    }

    void record(const Entry& e) override
    {
        switch (e.kind)
        {
        case EntryKind::Spawn:
            if (e.p && e.t.rfind("sys:", 0) == 0 && monitored_.count(Signature{e.t.substr(4)}))
                tracked_.insert(*e.p);
            break;
        case EntryKind::Send:
            ++messages;
            if (e.t == to_string(Via::Route) || e.t == to_string(Via::Forwd))
                ++routed_hops;
            if (auto* m = e.msg ? std::get_if<SystemMessage>(&*e.msg) : nullptr; m && m->tag == "req")
                sent_at_[m->value] = e.step;
            break;
        case EntryKind::Consume:
            if (auto* m = e.msg ? std::get_if<SystemMessage>(&*e.msg) : nullptr; m && m->tag == "rep")
            {
                auto it = sent_at_.find(m->value);
                if (it == sent_at_.end())
                    break;
                const auto rt = static_cast<double>(e.step - it->second);
                sent_at_.erase(it);
                ++replies;
                rt_sum += rt;
                rt_max = std::max(rt_max, rt);
            }
            break;
        case EntryKind::Emit:
        {
            const Message* m = e.msg ? as_message(*e.msg) : nullptr;
            if (!m || m->q() != Qualifier::Evt || !e.actor)
                break;
            const auto act = m->event().act;
            if (act != Action::Snd && act != Action::Rcv)
                break;
            ++system_events;
            if (tracked_.count(*e.actor))
                ++events;
            break;
        }
        default: break;
        }
    }

    std::uint64_t messages = 0;
    std::uint64_t routed_hops = 0;
    std::uint64_t events = 0;
    std::uint64_t system_events = 0;
    std::uint64_t replies = 0;
    double rt_sum = 0;
    double rt_max = 0;

  private:
    std::set<Signature> monitored_;
    std::set<Pid> tracked_;
    std::map<std::int64_t, std::uint64_t> sent_at_;
};

double pct(double value, double base)
{
    if (base == 0)
        return 0;
    return (value - base) / base * 100.0;
}

} // namespace

Scenario gen_master_worker(const BenchConfig& cfg)
{
    if (cfg.workers == 0 || cfg.requests == 0)
        throw Error("bench needs at least one worker and one request");
    auto load = std::make_shared<const LoadSchedule>(
        gen_load(cfg.profile, cfg.workers, cfg.loading_steps, cfg.seed, cfg.bursts));
    const auto r = cfg.requests;

    Scenario s;
    s.name = "master-worker";
    s.custom[kMasterSig] = [load, r](Pid, std::optional<Pid>) { return std::make_unique<MasterBehavior>(load, r); };
    s.custom[kWorkerSig] = [r](Pid, std::optional<Pid> parent) -> std::unique_ptr<Behavior> {
        if (!parent)
            throw Error("worker without a master");
        return std::make_unique<WorkerBehavior>(*parent, r);
    };
    if (cfg.monitor_master)
    {
        s.custom[kBootSig] = [](Pid, std::optional<Pid>) { return std::make_unique<BootBehavior>(); };
        s.initial = {kBootSig};
    }
    else
        s.initial = {kMasterSig};

    if (!cfg.phi.empty())
        s.phi = cfg.phi;
    else
    {
        s.phi[kWorkerSig] = std::make_shared<const MonitorSpec>(order_monitor("served", kWorkerSig, worker_chain(r)));
        if (cfg.monitor_master)
            s.phi[kMasterSig] =
                std::make_shared<const MonitorSpec>(order_monitor("terminates", kMasterSig, {Action::Ext}));
    }
    return s;
}

std::uint64_t repetition_seed(std::uint64_t base, std::size_t k) noexcept
{
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (k + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

MetricsReport measure(const BenchConfig& cfg, std::uint64_t seed)
{
    const Scenario s = gen_master_worker(cfg);
    std::set<Signature> monitored;
    if (cfg.mode != MonitoringMode::None)
        for (const auto& [sig, spec] : s.phi)
            monitored.insert(sig);
    MetricsSink sink(std::move(monitored));

    RunConfig rc;
    rc.mode = cfg.mode;
    rc.snapshots = false;
    rc.record_choices = false;
    rc.step_cap = cfg.step_cap;
    Runtime rt = build_runtime(s, rc, &sink);
    run(rt, SeedSchedule{seed});
    rt.set_sink(nullptr);

    MetricsReport m;
    m.duration = static_cast<double>(rt.steps());
    m.messages_total = static_cast<double>(sink.messages);
    m.events_total = static_cast<double>(sink.events);
    m.system_events = static_cast<double>(sink.system_events);
    m.routed_hops = static_cast<double>(sink.routed_hops);
    m.tracers_created = static_cast<double>(rt.created(Pid::Kind::Tracer));
    m.tracers_peak = static_cast<double>(rt.live_peak(Pid::Kind::Tracer));
    m.tracers_collected = static_cast<double>(rt.created(Pid::Kind::Tracer) - rt.live(Pid::Kind::Tracer));
    m.analysers_created = static_cast<double>(rt.created(Pid::Kind::Analyzer));
    m.analysers_collected = static_cast<double>(rt.created(Pid::Kind::Analyzer) - rt.live(Pid::Kind::Analyzer));
    m.replies = static_cast<double>(sink.replies);
    m.rt_mean = sink.replies ? sink.rt_sum / static_cast<double>(sink.replies) : 0.0;
    m.rt_max = sink.rt_max;
    m.mailbox_peak = static_cast<double>(rt.mailbox_peak());
    return m;
}

MetricsReport run_bench(const BenchConfig& cfg)
{
    const std::size_t reps = std::max<std::size_t>(cfg.repetitions, 1);
    MetricsReport mean;
    MetricsReport base;
    BenchConfig none = cfg;
    none.mode = MonitoringMode::None;
    auto add = [](MetricsReport& acc, const MetricsReport& m) {
        acc.duration += m.duration;
        acc.messages_total += m.messages_total;
        acc.events_total += m.events_total;
        acc.system_events += m.system_events;
        acc.routed_hops += m.routed_hops;
        acc.tracers_created += m.tracers_created;
        acc.tracers_peak += m.tracers_peak;
        acc.tracers_collected += m.tracers_collected;
        acc.analysers_created += m.analysers_created;
        acc.analysers_collected += m.analysers_collected;
        acc.rt_mean += m.rt_mean;
        acc.rt_max += m.rt_max;
        acc.mailbox_peak += m.mailbox_peak;
        acc.replies += m.replies;
    };
    for (std::size_t k = 0; k < reps; ++k)
    {
        const auto seed = repetition_seed(cfg.seed, k);
        const auto m = measure(cfg, seed);
        add(mean, m);
        add(base, cfg.mode == MonitoringMode::None ? m : measure(none, seed));
    }
    for (auto* r : {&mean, &base})
    {
        const double d = static_cast<double>(reps);
        for (double* f : {&r->duration, &r->messages_total, &r->events_total, &r->system_events, &r->routed_hops,
                          &r->tracers_created, &r->tracers_peak, &r->tracers_collected, &r->analysers_created,
                          &r->analysers_collected, &r->rt_mean, &r->rt_max, &r->mailbox_peak, &r->replies})
            *f /= d;
    }
    mean.overhead_duration_pct = pct(mean.duration, base.duration);
    mean.overhead_messages_pct = pct(mean.messages_total, base.messages_total);
    mean.overhead_rt_pct = pct(mean.rt_mean, base.rt_mean);
    return mean;
}

const std::vector<std::string>& csv_columns()
{
    static const std::vector<std::string> cols{"n",
                                               "profile",
                                               "mode",
                                               "rep",
                                               "duration",
                                               "messages_total",
                                               "events_total",
                                               "routed_hops",
                                               "tracers_created",
                                               "tracers_peak",
                                               "rt_mean",
                                               "rt_max",
                                               "mailbox_peak",
                                               "overhead_duration_pct",
                                               "overhead_messages_pct",
                                               "overhead_rt_pct"};
    return cols;
}

void write_csv_header(std::ostream& out)
{
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << (i ? "," : "") << cols[i];
    out << "\n";
}

void write_csv_row(std::ostream& out, const BenchRow& row)
{
    const auto& c = row.config;
    const auto& m = row.metrics;
    const auto flags = out.flags();
    const auto prec = out.precision();
    out << std::setprecision(10) << c.workers << "," << to_string(c.profile) << "," << to_string(c.mode) << ","
        << c.repetitions << "," << m.duration << "," << m.messages_total << "," << m.events_total << ","
        << m.routed_hops << "," << m.tracers_created << "," << m.tracers_peak << "," << m.rt_mean << "," << m.rt_max
        << "," << m.mailbox_peak << "," << m.overhead_duration_pct << "," << m.overhead_messages_pct << ","
        << m.overhead_rt_pct << "\n";
    out.flags(flags);
    out.precision(prec);
}

std::vector<std::size_t> load_steps(std::size_t workers)
{
    std::vector<std::size_t> out;
    for (std::size_t k = 1; k <= 10; ++k)
        out.push_back(std::max<std::size_t>(k * workers / 10, 1));
    return out;
}

} // namespace choreo
