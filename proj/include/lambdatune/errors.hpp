#pragma once

#include <stdexcept>
#include <string>

namespace lambdatune {

// All harness failures derive from Error so callers can catch one type at
// the top level while tests still distinguish the individual conditions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define LAMBDATUNE_DEFINE_ERROR(Name)      \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

LAMBDATUNE_DEFINE_ERROR(RangeError);
LAMBDATUNE_DEFINE_ERROR(DomainError);
LAMBDATUNE_DEFINE_ERROR(ConfigError);
LAMBDATUNE_DEFINE_ERROR(InputError);
LAMBDATUNE_DEFINE_ERROR(ExtrapolationError);
LAMBDATUNE_DEFINE_ERROR(NoOverlapError);
LAMBDATUNE_DEFINE_ERROR(InsufficientDataError);
LAMBDATUNE_DEFINE_ERROR(MissingPointError);
LAMBDATUNE_DEFINE_ERROR(MismatchError);
LAMBDATUNE_DEFINE_ERROR(BracketError);
LAMBDATUNE_DEFINE_ERROR(ParseError);
LAMBDATUNE_DEFINE_ERROR(SchemaError);
LAMBDATUNE_DEFINE_ERROR(ProcessError);
LAMBDATUNE_DEFINE_ERROR(IoError);

#undef LAMBDATUNE_DEFINE_ERROR

// A sweep failure names the (qp, k) job that broke it. `completed` counts
// the encodes of the same sweep that did finish (they are cached).
// `infeasible` is set when every failed job raised DomainError, i.e. the
// backend has no RD point for that k rather than a broken encode.
class SweepError : public Error {
 public:
  SweepError(const std::string& what, int qp, double k, int completed = 0,
             bool infeasible = false)
      : Error(what), qp_(qp), k_(k), completed_(completed), infeasible_(infeasible) {}

  int qp() const { return qp_; }
  double k() const { return k_; }
  int completed() const { return completed_; }
  bool infeasible() const { return infeasible_; }

 private:
  int qp_;
  double k_;
  int completed_;
  bool infeasible_;
};

}  // namespace lambdatune
