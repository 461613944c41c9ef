#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pfil/ir.hpp"

namespace pfil {

enum class Category {
  IntervalAvailability,
  WellFormedInterval,
  DelayPipelining,
  InstanceAvailability,
  InstanceConflict,
  WhereClause,
  WidthMatch,
  BundleSize,
  NonnegSubtraction,
  OutparamConstraint,
};
constexpr int kNumCategories = 10;

const char* to_string(Category c);
std::optional<Category> category_from_string(const std::string& s);

/// A variable ranging over [lo, hi); used to enumerate obligations when no
/// solver is available. Bounds may mention earlier domain variables.
struct Domain {
  std::string var;
  Expr lo;
  Expr hi;
};

struct Obligation {
  Formula pc;
  Formula goal;
  Category category = Category::IntervalAvailability;
  SourceSpan loc;
  std::string note;
  std::vector<Domain> domains;
};

struct Verdict {
  enum class Kind { Proven, Refuted, Unknown };
  Kind kind = Kind::Unknown;
  Binding counterexample;  // Refuted
  std::string reason;      // Unknown

  static Verdict proven() { return {Kind::Proven, {}, {}}; }
  static Verdict refuted(Binding cex) { return {Kind::Refuted, std::move(cex), {}}; }
  static Verdict unknown(std::string why) { return {Kind::Unknown, {}, std::move(why)}; }
};

const char* to_string(Verdict::Kind k);

/// One SMT-LIB 2 solver process driven over pipes with push/pop scopes.
class SmtSession {
 public:
  SmtSession(std::string solver_path, int timeout_ms);
  ~SmtSession();
  SmtSession(const SmtSession&) = delete;
  SmtSession& operator=(const SmtSession&) = delete;

  /// Returns Proven iff the conjunction of `facts` is unsatisfiable; on sat,
  /// Refuted with a model over `vars`.
  Verdict check_unsat(const std::vector<Formula>& facts);

  /// Number of check-sat queries issued so far.
  std::size_t queries() const { return queries_; }

 private:
  void start();
  void send(const std::string& text);
  std::string read_response();
  void kill();

  std::string path_;
  int timeout_ms_;
  int pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::string buffer_;
  std::string failure_;
  std::size_t queries_ = 0;
};

/// Discharges obligations: closed obligations are evaluated directly, open
/// ones go to the SMT session when one is configured, and otherwise are
/// enumerated over their bounded domains when small enough.
class Prover {
 public:
  /// `solver_path` empty means concrete-only mode.
  explicit Prover(std::string solver_path = {}, int timeout_ms = 10000);
  ~Prover();

  Verdict discharge(const Obligation& o, const std::vector<Formula>& assumptions);

  bool symbolic() const { return !path_.empty(); }
  std::size_t solver_queries() const { return session_ ? session_->queries() : 0; }

 private:
  std::string path_;
  int timeout_ms_;
  std::unique_ptr<SmtSession> session_;
};

/// Builds the SMT-LIB script body (declarations, axioms and assertions) for
/// a conjunction of facts; exposed for tests.
std::string smt_encode(const std::vector<Formula>& facts, std::vector<std::string>& vars);

/// Evaluates assumptions ∧ pc ∧ ¬goal under `b`; true means `b` is a genuine
/// counterexample.
bool is_counterexample(const Obligation& o, const std::vector<Formula>& assumptions,
                       const Binding& b);

}  // namespace pfil
