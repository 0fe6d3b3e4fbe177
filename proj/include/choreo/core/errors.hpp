#pragma once

#include <stdexcept>
#include <string>

namespace choreo
{

class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

#define CHOREO_DEFINE_ERROR(Name)                                                                                      \
    class Name : public Error                                                                                          \
    {                                                                                                                  \
      public:                                                                                                          \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {}                                           \
    }

CHOREO_DEFINE_ERROR(MalformedEvent);
CHOREO_DEFINE_ERROR(NestedRouting);
CHOREO_DEFINE_ERROR(WrongVariant);
CHOREO_DEFINE_ERROR(ParseError);

CHOREO_DEFINE_ERROR(AlreadyTraced);
CHOREO_DEFINE_ERROR(NotTraced);

CHOREO_DEFINE_ERROR(ScheduleExhausted);
CHOREO_DEFINE_ERROR(StepCapExceeded);
CHOREO_DEFINE_ERROR(ExplosionGuard);
CHOREO_DEFINE_ERROR(InvalidChoice);

CHOREO_DEFINE_ERROR(OverlappingPatterns);
CHOREO_DEFINE_ERROR(MalformedPattern);
CHOREO_DEFINE_ERROR(LogIncomplete);

#undef CHOREO_DEFINE_ERROR

/// Violations of the tracer protocol's Expect clauses. Unreachable in a
/// correct choreography; raised by handlers and recorded as log faults.
class ProtocolError : public Error
{
  public:
    enum class Kind
    {
        UnknownQualifier,
        MisdirectedDtc,
        OrphanRoutedEvent,
        DtcProtocolViolation,
        UnknownProcess,
    };

    ProtocolError(Kind kind, const std::string& detail) : Error(std::string(name(kind)) + ": " + detail), kind_(kind)
    {
    }

    Kind kind() const noexcept { return kind_; }

    static const char* name(Kind k) noexcept
    {
        switch (k)
        {
        case Kind::UnknownQualifier: return "UnknownQualifier";
        case Kind::MisdirectedDtc: return "MisdirectedDtc";
        case Kind::OrphanRoutedEvent: return "OrphanRoutedEvent";
        case Kind::DtcProtocolViolation: return "DtcProtocolViolation";
        case Kind::UnknownProcess: return "UnknownProcess";
        }
        return "?";
    }

  private:
    Kind kind_;
};

} // namespace choreo
