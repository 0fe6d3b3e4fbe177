#pragma once

#include "choreo/core/tracer_state.hpp"
#include "choreo/runtime/mail.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace choreo
{

enum class EntryKind : std::uint8_t
{
    Spawn,     // p=child t=role
    Send,      // p=receiver t=via msg
    Deliver,   // p=sender (absent for trace streams) msg
    Drop,      // delivery to a terminated process
    Consume,   // msg t=mode for tracers
    Emit,      // p=tracer (absent under inline analysis) msg=evt
    Bind,      // p=system q=tracer
    Unbind,    // p=system q=tracer
    Flush,     // p=system q=tracer msg=evt
    Resume,    // p=system
    Exit,      //
    Crash,     //
    Terminate, //
    Analyse,   // msg=evt
    Branch,    // t=branch id
    PiAdd,     // p=key q=value
    PiDel,     // p=key q=value
    GammaAdd,  // p t=mark
    GammaDel,  // p
    GammaMark, // p t=new mark
    ModeSwitch, // t=new mode
    State,     // snapshot
    Monitor,   // p=monitored pid t=signature
    Verdict,   // p=monitored pid t=signature/verdict
    Fault,     // t=error kind, msg optional
    Note,      // t
};

inline constexpr std::size_t kEntryKindCount = static_cast<std::size_t>(EntryKind::Note) + 1;

const char* to_string(EntryKind k) noexcept;
std::optional<EntryKind> parse_entry_kind(std::string_view text) noexcept;

/// One line of the execution log. Unused fields stay empty.
struct Entry
{
    std::uint64_t step = 0;
    std::optional<Pid> actor;
    EntryKind kind = EntryKind::Note;
    std::optional<Pid> p;
    std::optional<Pid> q;
    std::string t;
    std::optional<TracerSnapshot> snap;
    std::optional<Mail> msg;

    friend bool operator==(const Entry&, const Entry&) = default;
};

/// `<step> <actor|-> <kind> [p=..] [q=..] [t=..] [mode=.. pi={..} gamma={..}] [msg=..]`
std::string render(const Entry& e);
Entry parse_entry(std::string_view line);

/// Receiver of log entries. A sink may declare which kinds it needs so the
/// runtime can skip building the others.
class LogSink
{
  public:
    virtual ~LogSink() = default;
    virtual bool wants(EntryKind) const { return true; }
    virtual void record(const Entry& e) = 0;
};

/// In-memory log; the canonical sink for replay, checking, and files.
class ExecutionLog : public LogSink
{
  public:
    void record(const Entry& e) override { entries_.push_back(e); }

    const std::vector<Entry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    void clear() noexcept { entries_.clear(); }

    /// Header lines (`# key value`) precede the entries in the text form.
    std::vector<std::pair<std::string, std::string>> header;
    std::optional<std::string> header_value(std::string_view key) const;

    void write(std::ostream& out) const;
    std::string text() const;
    static ExecutionLog read(std::istream& in);

  private:
    std::vector<Entry> entries_;
};

/// Forwards to several sinks.
class TeeSink : public LogSink
{
  public:
    TeeSink(LogSink* a, LogSink* b) : a_(a), b_(b) {}
    bool wants(EntryKind k) const override { return (a_ && a_->wants(k)) || (b_ && b_->wants(k)); }
    void record(const Entry& e) override
    {
        if (a_ && a_->wants(e.kind))
            a_->record(e);
        if (b_ && b_->wants(e.kind))
            b_->record(e);
    }

  private:
    LogSink* a_;
    LogSink* b_;
};

} // namespace choreo
