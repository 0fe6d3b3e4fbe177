#include "choreo/core/message.hpp"

#include "choreo/core/errors.hpp"

#include <charconv>

namespace choreo
{

const char* to_string(Action a) noexcept
{
    switch (a)
    {
    case Action::Frk: return "frk";
    case Action::Ext: return "ext";
    case Action::Snd: return "snd";
    case Action::Rcv: return "rcv";
    }
    return "?";
}

std::optional<Action> parse_action(std::string_view text) noexcept
{
    if (text == "frk")
        return Action::Frk;
    if (text == "ext")
        return Action::Ext;
    if (text == "snd")
        return Action::Snd;
    if (text == "rcv")
        return Action::Rcv;
    return std::nullopt;
}

const char* to_string(Qualifier q) noexcept
{
    switch (q)
    {
    case Qualifier::Evt: return "evt";
    case Qualifier::Dtc: return "dtc";
    case Qualifier::Rtd: return "rtd";
    }
    return "?";
}

const TraceEvent& RoutedMessage::event() const
{
    if (auto* e = std::get_if<TraceEvent>(&emb))
        return *e;
    throw WrongVariant("routed message embeds a dtc, not an evt");
}

const DetachCommand& RoutedMessage::command() const
{
    if (auto* c = std::get_if<DetachCommand>(&emb))
        return *c;
    throw WrongVariant("routed message embeds an evt, not a dtc");
}

const TraceEvent& Message::event() const
{
    if (auto* e = std::get_if<TraceEvent>(&value_))
        return *e;
    throw WrongVariant(std::string("expected evt, have ") + to_string(q()));
}

const DetachCommand& Message::command() const
{
    if (auto* c = std::get_if<DetachCommand>(&value_))
        return *c;
    throw WrongVariant(std::string("expected dtc, have ") + to_string(q()));
}

const RoutedMessage& Message::routed() const
{
    if (auto* r = std::get_if<RoutedMessage>(&value_))
        return *r;
    throw WrongVariant(std::string("expected rtd, have ") + to_string(q()));
}

TraceEvent mk_event(Action act, Pid src, std::optional<Pid> tgt, std::optional<Signature> sig, std::uint64_t seq)
{
    if (!src.is_system())
        throw MalformedEvent("src must be a system pid, got " + to_string(src));
    const bool want_tgt = act == Action::Frk || act == Action::Snd;
    const bool want_sig = act == Action::Frk;
    if (want_tgt != tgt.has_value())
        throw MalformedEvent(std::string(to_string(act)) + (want_tgt ? " requires" : " must not carry") + " tgt");
    if (want_sig != sig.has_value())
        throw MalformedEvent(std::string(to_string(act)) + (want_sig ? " requires" : " must not carry") + " sig");
    if (tgt && !tgt->is_system())
        throw MalformedEvent("tgt must be a system pid, got " + to_string(*tgt));
    return TraceEvent{act, src, tgt, std::move(sig), seq};
}

RoutedMessage wrap_routed(const Message& m, Pid router)
{
    switch (m.q())
    {
    case Qualifier::Evt: return RoutedMessage{router, m.event()};
    case Qualifier::Dtc: return RoutedMessage{router, m.command()};
    case Qualifier::Rtd: break;
    }
    throw NestedRouting("cannot wrap " + render(m));
}

std::string render(const TraceEvent& e)
{
    std::string out = "evt(";
    out += to_string(e.act);
    out += " src=" + to_string(e.src);
    if (e.tgt)
        out += " tgt=" + to_string(*e.tgt);
    if (e.sig)
        out += " sig=" + e.sig->name;
    out += " seq=" + std::to_string(e.seq) + ")";
    return out;
}

std::string render(const DetachCommand& c)
{
    return "dtc(iss=" + to_string(c.iss) + " tgt=" + to_string(c.tgt) + ")";
}

std::string render(const RoutedMessage& r)
{
    std::string emb = std::visit([](const auto& x) { return render(x); }, r.emb);
    return "rtd(rtr=" + to_string(r.rtr) + " emb=" + emb + ")";
}

std::string render(const Message& m)
{
    switch (m.q())
    {
    case Qualifier::Evt: return render(m.event());
    case Qualifier::Dtc: return render(m.command());
    case Qualifier::Rtd: return render(m.routed());
    }
    return {};
}

namespace
{

class Reader
{
  public:
    explicit Reader(std::string_view text) : text_(text) {}

    bool done() const { return pos_ == text_.size(); }

    bool try_lit(std::string_view lit)
    {
        if (text_.substr(pos_, lit.size()) != lit)
            return false;
        pos_ += lit.size();
        return true;
    }

    void expect(std::string_view lit)
    {
        if (!try_lit(lit))
            fail("expected '" + std::string(lit) + "'");
    }

    std::string_view token()
    {
        std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != ' ' && text_[pos_] != ')' && text_[pos_] != '(' &&
               text_[pos_] != '=')
            ++pos_;
        if (start == pos_)
            fail("expected token");
        return text_.substr(start, pos_ - start);
    }

    Pid pid()
    {
        auto t = token();
        auto p = parse_pid(t);
        if (!p)
            fail("bad pid '" + std::string(t) + "'");
        return *p;
    }

    std::uint64_t number()
    {
        auto t = token();
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || ptr != t.data() + t.size())
            fail("bad number '" + std::string(t) + "'");
        return v;
    }

    [[noreturn]] void fail(const std::string& why) const
    {
        throw ParseError(why + " at column " + std::to_string(pos_) + " in '" + std::string(text_) + "'");
    }

  private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

TraceEvent read_event(Reader& r)
{
    r.expect("evt(");
    auto act_text = r.token();
    auto act = parse_action(act_text);
    if (!act)
        r.fail("bad action '" + std::string(act_text) + "'");
    r.expect(" src=");
    Pid src = r.pid();
    std::optional<Pid> tgt;
    std::optional<Signature> sig;
    if (r.try_lit(" tgt="))
        tgt = r.pid();
    if (r.try_lit(" sig="))
        sig = Signature{std::string(r.token())};
    r.expect(" seq=");
    auto seq = r.number();
    r.expect(")");
    try
    {
        return mk_event(*act, src, tgt, std::move(sig), seq);
    }
    catch (const MalformedEvent& e)
    {
        r.fail(e.what());
    }
}

DetachCommand read_command(Reader& r)
{
    r.expect("dtc(iss=");
    Pid iss = r.pid();
    r.expect(" tgt=");
    Pid tgt = r.pid();
    r.expect(")");
    return DetachCommand{iss, tgt};
}

} // namespace

Message parse_message(std::string_view text)
{
    Reader r(text);
    std::optional<Message> out;
    if (text.starts_with("evt("))
        out = read_event(r);
    else if (text.starts_with("dtc("))
        out = read_command(r);
    else if (r.try_lit("rtd(rtr="))
    {
        Pid rtr = r.pid();
        r.expect(" emb=");
        if (text.find("emb=rtd(") != std::string_view::npos)
            r.fail("nested rtd");
        RoutedMessage rm{rtr, DetachCommand{}};
        Reader probe = r;
        if (probe.try_lit("evt("))
            rm.emb = read_event(r);
        else
            rm.emb = read_command(r);
        r.expect(")");
        out = std::move(rm);
    }
    else
        r.fail("unknown qualifier");
    if (!r.done())
        r.fail("trailing characters");
    return *out;
}

} // namespace choreo
