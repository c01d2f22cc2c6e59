#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "acinv/common.hpp"

// AST for the supported C subset: integer scalars, composite (struct)
// declarations, one-dimensional arrays, pointers, functions, the usual
// structured statements. Nodes keep exact source spans; the original text is
// retained verbatim so that annotated re-emission is purely textual.

namespace acinv::c {

struct TypeRef {
  std::string base;       // "int", "unsigned", "size_t", "Node", ... (no "struct" prefix)
  bool is_struct = false; // written with the struct keyword
  int pointer_depth = 0;
  bool is_array = false;  // one-dimensional only
  std::string array_size; // literal or identifier text; empty for [] params

  bool is_pointer_like() const { return pointer_depth > 0 || is_array; }
  bool is_unsigned() const;
  std::string to_string() const;
  bool operator==(const TypeRef&) const = default;
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

enum class UnaryOp { Neg, Not, BitNot, Deref, AddrOf, PreInc, PreDec, PostInc, PostDec };
enum class BinaryOp {
  Add, Sub, Mul, Div, Mod,
  Lt, Le, Gt, Ge, Eq, Ne,
  And, Or,
  BitAnd, BitOr, BitXor, Shl, Shr,
};

struct Expr {
  enum class Kind { IntLit, NullLit, Var, Member, Index, Unary, Binary, Call };

  Kind kind;
  SourceSpan span;

  std::int64_t int_value = 0;       // IntLit
  std::string name;                 // Var, Member (member name), Call (callee)
  bool arrow = false;               // Member: -> vs .
  UnaryOp unary_op = UnaryOp::Neg;  // Unary
  BinaryOp binary_op = BinaryOp::Add;
  ExprPtr lhs;  // Member/Index/Unary base, Binary lhs
  ExprPtr rhs;  // Index subscript, Binary rhs
  std::vector<ExprPtr> args;  // Call

  /// Base variable of an lvalue chain (a, a[i], a.b, p->next, *p); empty if none.
  const Expr* root_var() const;
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

enum class LoopForm { While, For, DoWhile };
enum class AssignOp { Assign, Add, Sub, Mul, Div, Mod, Shl, Shr, BitAnd, BitOr, BitXor };

struct Stmt {
  enum class Kind {
    Decl, Assign, CompoundAssign, IncrDecr, If, While, Block, Call,
    Return, Break, Continue, Empty,
  };

  Kind kind;
  SourceSpan span;

  // Decl
  std::string decl_name;
  TypeRef decl_type;
  ExprPtr init;  // optional

  // Assign / CompoundAssign / IncrDecr
  ExprPtr target;
  AssignOp assign_op = AssignOp::Assign;
  ExprPtr value;
  UnaryOp incr_op = UnaryOp::PostInc;

  // If
  ExprPtr cond;
  StmtPtr then_branch;
  StmtPtr else_branch;  // optional

  // While (for and do-while are desugared onto this node; the original form
  // and span are kept)
  LoopForm loop_form = LoopForm::While;
  ExprPtr guard;
  StmtPtr body;

  // Block
  std::vector<StmtPtr> stmts;

  // Call (statement position)
  ExprPtr call;

  // Return
  ExprPtr ret_value;  // optional
};

struct CompositeDecl {
  std::string name;
  std::vector<std::pair<std::string, TypeRef>> members;
  SourceSpan span;
};

struct FunctionDef {
  std::string name;
  TypeRef return_type;
  struct Param {
    std::string name;
    TypeRef type;
    bool is_pointer = false;  // pointer or array parameter
  };
  std::vector<Param> params;
  StmtPtr body;  // null for a prototype
  SourceSpan span;
  bool is_prototype() const { return body == nullptr; }
};

struct Ast {
  std::vector<CompositeDecl> type_decls;
  std::vector<FunctionDef> functions;
  std::string source_text;  // verbatim
  int line_count = 0;
  // Object-like "#define NAME <integer>" directives seen while lexing. Nothing
  // is ever expanded; these resolve symbolic constants in ACSL evaluation.
  std::map<std::string, std::int64_t> defines;
  // typedef name -> underlying type (one level only)
  std::map<std::string, TypeRef> typedefs;

  const CompositeDecl* find_struct(const std::string& name) const;
  const FunctionDef* find_function(const std::string& name) const;
  /// Resolve typedef indirection to the underlying named type.
  TypeRef resolve(const TypeRef& t) const;
  /// Verbatim slice of source_text covered by a span.
  std::string slice(const SourceSpan& s) const;
};

}  // namespace acinv::c
