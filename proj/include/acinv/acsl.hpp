#pragma once

#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "acinv/common.hpp"

// Model of the ACSL fragment the tool reads and writes: boolean and integer
// terms, relation chains (0 <= i <= 30), quantifiers over integers, \valid,
// \at, and applications of user predicates. Expressions are immutable and
// shared; the canonical rendering doubles as the deduplication key.

namespace acinv::acsl {

struct AcslExpr;
using AcslExprPtr = std::shared_ptr<const AcslExpr>;

enum class UnOp { Neg, Not };
enum class BinOp { Add, Sub, Mul, Div, Mod, And, Or, Implies };
enum class RelOp { Lt, Le, Gt, Ge, Eq, Ne };
enum class Quantifier { Forall, Exists };

struct AcslExpr {
  enum class Kind {
    IntLit, BoolLit, NullLit, Var, Member, Index, Deref,
    Unary, Binary, RelChain, Quant, Valid, At, PredApp,
  };

  Kind kind = Kind::IntLit;
  long long int_value = 0;     // IntLit
  bool bool_value = false;     // BoolLit
  std::string name;            // Var, Member field, PredApp predicate, At label
  bool arrow = false;          // Member: -> vs .
  UnOp un_op = UnOp::Neg;
  BinOp bin_op = BinOp::And;
  Quantifier quant = Quantifier::Forall;
  std::vector<std::pair<std::string, std::string>> binders;  // (type, name)
  AcslExprPtr a;  // Member/Index/Deref/Unary/Valid/At base, Binary lhs, Quant body
  AcslExprPtr b;  // Index subscript, Binary rhs
  std::vector<AcslExprPtr> operands;  // RelChain terms, PredApp arguments
  std::vector<RelOp> rel_ops;         // between consecutive RelChain terms
};

/// Parse an expression; throws AcslSyntaxError with the byte offset of the
/// problem. Accepts both NULL and \null, and C-style comparisons chained in
/// the ACSL way (a <= b < c).
AcslExprPtr parse_acsl_expr(const std::string& text);

/// Canonical text. parse(render(e)) is structurally equal to e.
std::string render(const AcslExpr& e);
std::string render(const AcslExprPtr& e);

bool equal(const AcslExpr& x, const AcslExpr& y);
bool equal(const AcslExprPtr& x, const AcslExprPtr& y);

/// Variables occurring free (quantifier binders excluded; predicate names are
/// reported separately by pred_names).
void free_vars(const AcslExpr& e, std::set<std::string>& out);
void pred_names(const AcslExpr& e, std::set<std::string>& out);

/// One loop invariant: an expression plus its canonical text.
struct Invariant {
  AcslExprPtr expr;
  std::string text;

  static Invariant from(AcslExprPtr e);
  bool operator==(const Invariant& other) const { return text == other.text; }
};

/// Annotation block placed above a loop. One invariant renders on a single
/// line; several render as a block with one invariant per line.
std::string render_loop_annotation(const std::vector<Invariant>& invariants);

/// Predicate or inductive definition attached to a data structure.
struct PredicateTemplate {
  enum class Kind { Predicate, Inductive };

  struct Case {
    std::string name;
    AcslExprPtr formula;
  };

  Kind kind = Kind::Predicate;
  std::string name;
  std::vector<std::pair<std::string, std::string>> params;  // (type text, name)
  AcslExprPtr body;          // Predicate
  std::vector<Case> cases;   // Inductive

  std::string render() const;
};

/// Parse one template, with or without the /*@ ... */ wrapper:
///   predicate valid_stack(struct stack_int *s) = \valid(s) && ...;
///   inductive is_list(struct node *p, struct node *q) { case empty: ...; }
PredicateTemplate parse_predicate_template(const std::string& text);

}  // namespace acinv::acsl
