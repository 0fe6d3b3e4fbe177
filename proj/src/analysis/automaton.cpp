#include "choreo/analysis/automaton.hpp"

#include "choreo/core/errors.hpp"

#include <algorithm>
#include <deque>

namespace choreo
{

namespace
{

bool literals_differ(const PatternTerm& a, const PatternTerm& b)
{
    return a.kind == PatternTerm::Kind::Literal && b.kind == PatternTerm::Kind::Literal && a.text != b.text;
}

bool may_overlap(const EventPattern& a, const EventPattern& b)
{
    if (a.act && b.act && *a.act != *b.act)
        return false;
    return !literals_differ(a.src, b.src) && !literals_differ(a.tgt, b.tgt) && !literals_differ(a.sig, b.sig);
}

void validate(const EventPattern& p, const std::string& where)
{
    const bool tgt_allowed = !p.act || *p.act == Action::Frk || *p.act == Action::Snd;
    const bool sig_allowed = !p.act || *p.act == Action::Frk;
    if (!tgt_allowed && p.tgt.kind != PatternTerm::Kind::Any)
        throw MalformedPattern(where + ": " + to_string(*p.act) + " events carry no tgt");
    if (!sig_allowed && p.sig.kind != PatternTerm::Kind::Any)
        throw MalformedPattern(where + ": " + to_string(*p.act) + " events carry no sig");
    if (p.sig.kind == PatternTerm::Kind::Self)
        throw MalformedPattern(where + ": self denotes a pid, not a signature");
    for (const auto* t : {&p.src, &p.tgt})
        if (t->kind == PatternTerm::Kind::Literal && !parse_pid(t->text))
            throw MalformedPattern(where + ": '" + t->text + "' is not a pid");
}

} // namespace

std::shared_ptr<const CompiledAutomaton> compile_monitor(const MonitorSpec& spec)
{
    auto out = std::make_shared<CompiledAutomaton>();
    out->name = spec.name;
    out->target = spec.target;

    std::map<std::string, std::size_t> index;
    auto intern = [&](const std::string& s) {
        auto [it, inserted] = index.emplace(s, out->states.size());
        if (inserted)
            out->states.push_back(s);
        return it->second;
    };
    if (spec.initial.empty())
        throw MalformedPattern("monitor " + spec.name + " has no initial state");
    intern(spec.initial);
    for (const auto& s : spec.states)
        intern(s);
    for (const auto& s : spec.accept)
        intern(s);
    for (const auto& s : spec.reject)
        intern(s);
    for (const auto& t : spec.transitions)
    {
        intern(t.from);
        intern(t.to);
    }

    out->initial = index.at(spec.initial);
    out->labels.assign(out->states.size(), Verdict::Inconclusive);
    for (const auto& s : spec.accept)
        out->labels[index.at(s)] = Verdict::Accept;
    for (const auto& s : spec.reject)
    {
        if (spec.accept.count(s))
            throw MalformedPattern("state " + s + " is labelled both accept and reject");
        out->labels[index.at(s)] = Verdict::Reject;
    }

    out->delta.resize(out->states.size());
    for (const auto& t : spec.transitions)
    {
        std::string where = "monitor " + spec.name + " transition " + t.from + " --" + t.pattern.render() + "--> " + t.to;
        validate(t.pattern, where);
        auto& row = out->delta[index.at(t.from)];
        for (const auto& other : row)
            if (may_overlap(other.pattern, t.pattern))
                throw OverlappingPatterns(where + " overlaps " + other.pattern.render());
        row.push_back({t.pattern, index.at(t.to)});
    }

    // Reachability of some verdict state from the initial state.
    std::vector<bool> seen(out->states.size(), false);
    std::deque<std::size_t> work{out->initial};
    seen[out->initial] = true;
    bool verdict_reachable = false;
    while (!work.empty())
    {
        auto s = work.front();
        work.pop_front();
        if (out->labels[s] != Verdict::Inconclusive)
            verdict_reachable = true;
        for (const auto& tr : out->delta[s])
            if (!seen[tr.to])
            {
                seen[tr.to] = true;
                work.push_back(tr.to);
            }
    }
    if (!verdict_reachable)
        out->warnings.push_back("UnreachableVerdict: monitor " + spec.name + " can never reach a verdict");
    return out;
}

RecognizerAutomaton::RecognizerAutomaton(std::shared_ptr<const CompiledAutomaton> table, std::optional<Pid> self)
    : table_(std::move(table)), self_(self), current_(table_->initial)
{
    if (table_->labels[current_] != Verdict::Inconclusive)
        flagged_ = table_->labels[current_];
}

Verdict RecognizerAutomaton::verdict() const noexcept
{
    return table_ ? table_->labels[current_] : Verdict::Inconclusive;
}

bool RecognizerAutomaton::matches(const EventPattern& p, const TraceEvent& e,
                                  std::map<std::string, std::string>& fresh) const
{
    if (p.act && *p.act != e.act)
        return false;
    auto term = [&](const PatternTerm& t, const std::optional<std::string>& value) {
        switch (t.kind)
        {
        case PatternTerm::Kind::Any: return true;
        case PatternTerm::Kind::Self: return value && self_ && *value == to_string(*self_);
        case PatternTerm::Kind::Literal: return value && *value == t.text;
        case PatternTerm::Kind::Var:
        {
            if (!value)
                return false;
            if (auto it = bindings_.find(t.text); it != bindings_.end())
                return it->second == *value;
            auto [it, inserted] = fresh.emplace(t.text, *value);
            return inserted || it->second == *value;
        }
        }
        return false;
    };
    auto pid_text = [](const std::optional<Pid>& p) -> std::optional<std::string> {
        if (!p)
            return std::nullopt;
        return to_string(*p);
    };
    std::optional<std::string> sig_text;
    if (e.sig)
        sig_text = e.sig->name;
    return term(p.src, to_string(e.src)) && term(p.tgt, pid_text(e.tgt)) && term(p.sig, sig_text);
}

Verdict RecognizerAutomaton::feed(const TraceEvent& e)
{
    if (flagged_ || !table_)
        return verdict();
    for (const auto& tr : table_->delta[current_])
    {
        std::map<std::string, std::string> fresh;
        if (matches(tr.pattern, e, fresh))
        {
            bindings_.merge(fresh);
            current_ = tr.to;
            break;
        }
    }
    auto v = table_->labels[current_];
    if (v != Verdict::Inconclusive)
        flagged_ = v;
    return v;
}

void RecognizerAutomaton::fingerprint(std::string& out) const
{
    out += "@";
    out += std::to_string(current_);
    for (const auto& [k, v] : bindings_)
        out += "," + k + "=" + v;
}

RecognizerAutomaton instantiate(const std::shared_ptr<const CompiledAutomaton>& table, Pid self)
{
    return RecognizerAutomaton(table, self);
}

std::pair<RecognizerAutomaton, Verdict> step(RecognizerAutomaton a, const TraceEvent& e)
{
    Verdict v = a.feed(e);
    return {std::move(a), v};
}

} // namespace choreo
