#include "choreo/choreography/scenario.hpp"

#include "choreo/analysis/monitor_file.hpp"
#include "choreo/core/errors.hpp"

#include <charconv>
#include <random>
#include <sstream>

namespace choreo
{

// Programs ------------------------------------------------------------------

namespace
{

std::vector<std::string> words(std::string_view text)
{
    std::vector<std::string> out;
    std::istringstream in{std::string(text)};
    std::string w;
    while (in >> w)
        out.push_back(w);
    return out;
}

ScriptOp parse_op(std::string_view text)
{
    auto w = words(text);
    auto fail = [&] { return ParseError("bad script op '" + std::string(text) + "'"); };
    if (w.empty())
        throw fail();
    ScriptOp op;
    if (w[0] == "fork" && w.size() == 4 && w[2] == "as")
    {
        op.kind = ScriptOp::Kind::Fork;
        op.sig = Signature{w[1]};
        op.var = w[3];
    }
    else if (w[0] == "send" && w.size() == 2)
    {
        op.kind = ScriptOp::Kind::Send;
        op.var = w[1];
    }
    else if (w.size() == 1 && w[0] == "recv")
        op.kind = ScriptOp::Kind::Recv;
    else if (w.size() == 1 && w[0] == "exit")
        op.kind = ScriptOp::Kind::Exit;
    else if (w.size() == 1 && w[0] == "crash")
        op.kind = ScriptOp::Kind::Crash;
    else if (w.size() == 1 && w[0] == "tick")
        op.kind = ScriptOp::Kind::Tick;
    else
        throw fail();
    return op;
}

} // namespace

Program Program::parse(std::string_view text)
{
    Program p;
    std::size_t start = 0;
    while (start <= text.size())
    {
        auto end = text.find_first_of(";\n", start);
        if (end == std::string_view::npos)
            end = text.size();
        auto part = text.substr(start, end - start);
        if (part.find_first_not_of(" \t\r") != std::string_view::npos)
            p.ops.push_back(parse_op(part));
        start = end + 1;
    }
    return p;
}

std::string Program::render() const
{
    std::string out;
    for (const auto& op : ops)
    {
        if (!out.empty())
            out += "; ";
        switch (op.kind)
        {
        case ScriptOp::Kind::Fork: out += "fork " + op.sig.name + " as " + op.var; break;
        case ScriptOp::Kind::Send: out += "send " + op.var; break;
        case ScriptOp::Kind::Recv: out += "recv"; break;
        case ScriptOp::Kind::Exit: out += "exit"; break;
        case ScriptOp::Kind::Crash: out += "crash"; break;
        case ScriptOp::Kind::Tick: out += "tick"; break;
        }
    }
    return out;
}

std::vector<Action> Program::actions() const
{
    std::vector<Action> out;
    for (const auto& op : ops)
    {
        switch (op.kind)
        {
        case ScriptOp::Kind::Fork: out.push_back(Action::Frk); break;
        case ScriptOp::Kind::Send: out.push_back(Action::Snd); break;
        case ScriptOp::Kind::Recv: out.push_back(Action::Rcv); break;
        case ScriptOp::Kind::Exit:
        case ScriptOp::Kind::Crash: out.push_back(Action::Ext); return out;
        case ScriptOp::Kind::Tick: break;
        }
    }
    out.push_back(Action::Ext);
    return out;
}

ScriptBehavior::ScriptBehavior(std::shared_ptr<const Program> program, std::optional<Pid> parent)
    : program_(std::move(program)), parent_(parent)
{
}

bool ScriptBehavior::ready(const Mailbox& mailbox) const
{
    if (pc_ < program_->ops.size() && program_->ops[pc_].kind == ScriptOp::Kind::Recv)
        return !mailbox.empty();
    return true;
}

Pid ScriptBehavior::resolve(const std::string& var) const
{
    if (var == "parent")
    {
        if (!parent_)
            throw Error("top-level process has no parent");
        return *parent_;
    }
    auto it = vars_.find(var);
    if (it == vars_.end())
        throw Error("unbound script variable '" + var + "'");
    return it->second;
}

void ScriptBehavior::step(ProcessContext& ctx)
{
    if (pc_ >= program_->ops.size())
    {
        ctx.exit();
        return;
    }
    const auto& op = program_->ops[pc_++];
    switch (op.kind)
    {
    case ScriptOp::Kind::Fork: vars_[op.var] = ctx.fork(op.sig); break;
    case ScriptOp::Kind::Send: ctx.send(resolve(op.var), SystemMessage{"m", ++sent_}); break;
    case ScriptOp::Kind::Recv: ctx.receive_any(); break;
    case ScriptOp::Kind::Exit: ctx.exit(); break;
    case ScriptOp::Kind::Crash: ctx.crash(); break;
    case ScriptOp::Kind::Tick: break;
    }
}

void ScriptBehavior::fingerprint(std::string& out) const
{
    out += "S" + std::to_string(pc_) + "," + std::to_string(sent_);
    for (const auto& [k, v] : vars_)
        out += k + "=" + to_string(v);
}

// Modes and runs ------------------------------------------------------------

const char* to_string(MonitoringMode m) noexcept
{
    switch (m)
    {
    case MonitoringMode::None: return "none";
    case MonitoringMode::Inline: return "inline";
    case MonitoringMode::OutlineEA: return "ea";
    case MonitoringMode::OutlineIA: return "ia";
    }
    return "?";
}

std::optional<MonitoringMode> parse_monitoring_mode(std::string_view text) noexcept
{
    for (auto m : {MonitoringMode::None, MonitoringMode::Inline, MonitoringMode::OutlineEA, MonitoringMode::OutlineIA})
        if (text == to_string(m))
            return m;
    return std::nullopt;
}

std::shared_ptr<const SystemFactory> make_factory(const Scenario& s)
{
    auto programs = s.programs;
    auto custom = s.custom;
    return std::make_shared<const SystemFactory>(
        [programs = std::move(programs), custom = std::move(custom)](const Signature& sig, Pid self,
                                                                     std::optional<Pid> parent)
            -> std::unique_ptr<Behavior> {
            if (auto it = custom.find(sig); it != custom.end())
                return it->second(self, parent);
            if (auto it = programs.find(sig); it != programs.end())
                return std::make_unique<ScriptBehavior>(it->second, parent);
            throw Error("no behavior for signature " + sig.name);
        });
}

std::shared_ptr<const TracerConfig> make_tracer_config(const Scenario& s, const RunConfig& cfg)
{
    auto tc = std::make_shared<TracerConfig>();
    tc->phi = s.phi;
    tc->compiled = compile_phi(s.phi);
    tc->variant = cfg.mode == MonitoringMode::OutlineIA ? AnalysisVariant::IA : AnalysisVariant::EA;
    tc->mutations = cfg.mutations;
    tc->snapshots = cfg.snapshots;
    return tc;
}

Started start(Runtime& rt, const Signature& g, std::shared_ptr<const TracerConfig> cfg)
{
    Started st;
    st.system = rt.spawn_system(g, true);
    st.root = rt.spawn(TracerBehavior::root(std::move(cfg), st.system), Pid::Kind::Tracer, "tracer:root");
    return st;
}

Runtime build_runtime(const Scenario& s, const RunConfig& cfg, LogSink* sink, std::vector<Started>* started)
{
    RuntimeOptions opts;
    opts.step_cap = cfg.step_cap;
    opts.record_choices = cfg.record_choices;
    opts.flush_on_clear = !cfg.mutations.has(Mutation::NoFlushInClear);
    Runtime rt(make_factory(s), opts);
    rt.set_sink(sink);
    if (cfg.mode == MonitoringMode::Inline)
        rt.set_inline_hook(std::make_unique<InlineMonitorHook>(std::make_shared<const CompiledPhi>(compile_phi(s.phi))));
    std::shared_ptr<const TracerConfig> tc;
    if (is_outline(cfg.mode))
        tc = make_tracer_config(s, cfg);
    for (const auto& g : s.initial)
    {
        Started st;
        if (tc)
            st = start(rt, g, tc);
        else
            st.system = rt.spawn_system(g, false);
        if (started)
            started->push_back(st);
    }
    return rt;
}

void describe(ExecutionLog& log, const Scenario& s, const RunConfig& cfg, const Schedule& schedule)
{
    log.header.emplace_back("scenario", s.name);
    log.header.emplace_back("mode", to_string(cfg.mode));
    log.header.emplace_back("mutations", cfg.mutations.render());
    log.header.emplace_back("snapshots", cfg.snapshots ? "on" : "off");
    log.header.emplace_back("schedule", to_string(schedule));
}

RunResult run_scenario(const Scenario& s, const RunConfig& cfg, const Schedule& schedule, LogSink* sink)
{
    VerdictCollector verdicts;
    TeeSink tee(sink, &verdicts);
    Runtime rt = build_runtime(s, cfg, &tee);
    RunResult out;
    out.outcome = run(rt, schedule);
    rt.set_sink(nullptr);
    out.verdicts = verdicts.verdicts();
    out.steps = rt.steps();
    for (auto k : {Pid::Kind::System, Pid::Kind::Tracer, Pid::Kind::Analyzer})
    {
        out.live[static_cast<std::size_t>(k)] = rt.live(k);
        out.created[static_cast<std::size_t>(k)] = rt.created(k);
    }
    return out;
}

VerdictMap inline_run(const Scenario& s, const Schedule& schedule)
{
    RunConfig cfg;
    cfg.mode = MonitoringMode::Inline;
    cfg.record_choices = false;
    Runtime rt = build_runtime(s, cfg);
    run(rt, schedule);
    return static_cast<const InlineMonitorHook*>(rt.inline_hook())->verdicts();
}

std::uint64_t enumerate_schedules(const Scenario& s, const RunConfig& cfg, const EnumerationOptions& opts,
                                  const std::function<bool(const StepSchedule&, bool truncated)>& visit)
{
    return enumerate_schedules(build_runtime(s, cfg), opts, visit);
}

// Built-in scenarios --------------------------------------------------------

namespace
{

std::shared_ptr<const Program> program(std::string_view text)
{
    return std::make_shared<const Program>(Program::parse(text));
}

MonitorSpecPtr order_spec(const std::string& sig, const std::vector<Action>& chain)
{
    return std::make_shared<const MonitorSpec>(order_monitor("order_" + sig, Signature{sig}, chain));
}

} // namespace

Scenario running_example()
{
    Scenario s;
    s.name = "running-example";
    s.programs[Signature{"P"}] = program("fork Q as q; send q; exit");
    s.programs[Signature{"Q"}] = program("recv; fork R as r; exit");
    s.programs[Signature{"R"}] = program("exit");
    s.initial = {Signature{"P"}};
    s.phi[Signature{"Q"}] = order_spec("Q", {Action::Rcv, Action::Frk, Action::Ext});
    s.phi[Signature{"R"}] = order_spec("R", {Action::Ext});
    return s;
}

Scenario running_example_crash()
{
    Scenario s = running_example();
    s.name = "running-example-crash";
    s.programs[Signature{"Q"}] = program("recv; fork R as r; crash");
    return s;
}

Scenario chain_scenario()
{
    Scenario s;
    s.name = "chain";
    s.programs[Signature{"P"}] = program("fork Q as q; send q; exit");
    s.programs[Signature{"Q"}] = program("recv; fork R as r; exit");
    s.programs[Signature{"R"}] = program("fork S as s; send s; exit");
    s.programs[Signature{"S"}] = program("recv; exit");
    s.initial = {Signature{"P"}};
    s.phi[Signature{"Q"}] = order_spec("Q", {Action::Rcv, Action::Frk, Action::Ext});
    s.phi[Signature{"R"}] = order_spec("R", {Action::Frk, Action::Snd, Action::Ext});
    return s;
}

Scenario shared_scenario()
{
    Scenario s;
    s.name = "shared";
    s.programs[Signature{"P"}] = program("fork Q as q; exit");
    s.programs[Signature{"Q"}] = program("fork S as s; send s; exit");
    s.programs[Signature{"S"}] = program("recv; exit");
    s.initial = {Signature{"P"}};
    s.phi[Signature{"Q"}] = order_spec("Q", {Action::Frk, Action::Snd, Action::Ext});
    return s;
}

std::vector<std::string> builtin_scenario_names()
{
    return {"running-example", "running-example-crash", "chain", "shared"};
}

Scenario scenario_by_name(std::string_view name)
{
    if (name == "running-example")
        return running_example();
    if (name == "running-example-crash")
        return running_example_crash();
    if (name == "chain")
        return chain_scenario();
    if (name == "shared")
        return shared_scenario();
    if (name.substr(0, 7) == "random:")
    {
        auto digits = name.substr(7);
        std::uint64_t seed = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), seed);
        if (ec == std::errc{} && ptr == digits.data() + digits.size() && !digits.empty())
            return random_scenario(seed);
    }
    throw ParseError("unknown scenario '" + std::string(name) + "'");
}

Scenario random_scenario(std::uint64_t seed, const RandomScenarioOptions& opts)
{
    std::mt19937_64 rng(seed);
    auto chance = [&](double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; };
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, std::max<std::size_t>(1, opts.max_processes))(rng);

    std::vector<std::vector<std::size_t>> children(n);
    for (std::size_t i = 1; i < n; ++i)
        children[std::uniform_int_distribution<std::size_t>(0, i - 1)(rng)].push_back(i);

    std::vector<std::size_t> inbound(n, 0); // messages each node gets from its parent
    std::vector<bool> replies(n, false);
    std::vector<bool> crashes(n, false);
    for (std::size_t i = 1; i < n; ++i)
    {
        inbound[i] = chance(opts.message_probability) ? std::uniform_int_distribution<std::size_t>(1, 2)(rng) : 0;
        replies[i] = chance(opts.reply_probability);
    }
    for (std::size_t i = 0; i < n; ++i)
        crashes[i] = !replies[i] && chance(opts.crash_probability);

    Scenario s;
    s.name = "random:" + std::to_string(seed);
    auto sig = [](std::size_t i) { return Signature{"G" + std::to_string(i)}; };
    for (std::size_t i = 0; i < n; ++i)
    {
        Program p;
        for (std::size_t k = 0; k < inbound[i]; ++k)
            p.ops.push_back({ScriptOp::Kind::Recv, {}, {}});
        std::size_t expected_replies = 0;
        for (std::size_t c : children[i])
        {
            const std::string var = "c" + std::to_string(c);
            p.ops.push_back({ScriptOp::Kind::Fork, sig(c), var});
            for (std::size_t k = 0; k < inbound[c]; ++k)
                p.ops.push_back({ScriptOp::Kind::Send, {}, var});
            if (replies[c])
                ++expected_replies;
        }
        std::vector<ScriptOp> tail;
        for (std::size_t k = 0; k < expected_replies; ++k)
            tail.push_back({ScriptOp::Kind::Recv, {}, {}});
        if (replies[i])
            tail.push_back({ScriptOp::Kind::Send, {}, "parent"});
        if (crashes[i])
        {
            // Crashing only after the sends to children keeps every child
            // able to finish; unanswered replies are simply dropped.
            auto cut = std::uniform_int_distribution<std::size_t>(0, tail.size())(rng);
            tail.resize(cut);
            tail.push_back({ScriptOp::Kind::Crash, {}, {}});
        }
        else
            tail.push_back({ScriptOp::Kind::Exit, {}, {}});
        p.ops.insert(p.ops.end(), tail.begin(), tail.end());
        auto prog = std::make_shared<const Program>(std::move(p));
        if (chance(opts.phi_probability))
            s.phi[sig(i)] = order_spec(sig(i).name, prog->actions());
        s.programs[sig(i)] = std::move(prog);
    }
    s.initial = {sig(0)};
    return s;
}

} // namespace choreo
