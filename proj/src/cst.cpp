#include "acinv/cst.hpp"

namespace acinv::c {

bool TypeRef::is_unsigned() const {
  if (pointer_depth > 0) return false;
  return base == "unsigned" || base.rfind("unsigned ", 0) == 0 || base == "size_t" ||
         base == "uint8_t" || base == "uint16_t" || base == "uint32_t" || base == "uint64_t";
}

std::string TypeRef::to_string() const {
  std::string s;
  if (is_struct) s += "struct ";
  s += base;
  for (int i = 0; i < pointer_depth; ++i) s += i == 0 ? " *" : "*";
  if (is_array) {
    s += "[" + array_size + "]";
  }
  return s;
}

const Expr* Expr::root_var() const {
  const Expr* e = this;
  for (;;) {
    switch (e->kind) {
      case Kind::Var:
        return e;
      case Kind::Member:
      case Kind::Index:
        e = e->lhs.get();
        break;
      case Kind::Unary:
        if (e->unary_op == UnaryOp::Deref || e->unary_op == UnaryOp::AddrOf ||
            e->unary_op == UnaryOp::PreInc || e->unary_op == UnaryOp::PreDec ||
            e->unary_op == UnaryOp::PostInc || e->unary_op == UnaryOp::PostDec) {
          e = e->lhs.get();
          break;
        }
        return nullptr;
      default:
        return nullptr;
    }
  }
}

const CompositeDecl* Ast::find_struct(const std::string& name) const {
  for (const auto& d : type_decls) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

const FunctionDef* Ast::find_function(const std::string& name) const {
  for (const auto& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

TypeRef Ast::resolve(const TypeRef& t) const {
  auto it = typedefs.find(t.base);
  if (it == typedefs.end()) return t;
  TypeRef r = it->second;  // one level only
  r.pointer_depth += t.pointer_depth;
  r.is_array = r.is_array || t.is_array;
  if (r.array_size.empty()) r.array_size = t.array_size;
  return r;
}

std::string Ast::slice(const SourceSpan& s) const {
  // walk to (line, col) offsets; spans are 1-based and inclusive
  std::size_t begin = std::string::npos;
  std::size_t end = std::string::npos;
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i <= source_text.size(); ++i) {
    if (line == s.start_line && col == s.start_col && begin == std::string::npos) begin = i;
    if (line == s.end_line && col == s.end_col) end = i;
    if (i == source_text.size()) break;
    if (source_text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  if (begin == std::string::npos || end == std::string::npos || end < begin) return {};
  return source_text.substr(begin, end - begin + 1);
}

}  // namespace acinv::c
