#include "acinv/acsl.hpp"

#include <cctype>
#include <cstring>

namespace acinv::acsl {

namespace {

// ---- tokens ----

struct Tok {
  enum class Kind { Ident, IntLit, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  long long value = 0;
  std::size_t offset = 0;
};

std::vector<Tok> tokenize(const std::string& s) {
  std::vector<Tok> out;
  std::size_t i = 0;
  auto ident_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
  auto ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };

  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c)) || c == '@') {
      ++i;
      continue;
    }
    Tok t;
    t.offset = i;
    if (c == '\\' && i + 1 < s.size() && ident_start(s[i + 1])) {
      t.kind = Tok::Kind::Ident;
      t.text.push_back(s[i++]);
      while (i < s.size() && ident_char(s[i])) t.text.push_back(s[i++]);
    } else if (ident_start(c)) {
      t.kind = Tok::Kind::Ident;
      while (i < s.size() && ident_char(s[i])) t.text.push_back(s[i++]);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      t.kind = Tok::Kind::IntLit;
      bool hex = c == '0' && i + 1 < s.size() && (s[i + 1] == 'x' || s[i + 1] == 'X');
      if (hex) {
        t.text += s[i];
        t.text += s[i + 1];
        i += 2;
        while (i < s.size() && std::isxdigit(static_cast<unsigned char>(s[i]))) t.text.push_back(s[i++]);
      } else {
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) t.text.push_back(s[i++]);
      }
      t.value = std::strtoll(t.text.c_str(), nullptr, 0);
    } else {
      t.kind = Tok::Kind::Punct;
      static const char* kMulti[] = {"==>", "==", "!=", "<=", ">=", "&&", "||", "->"};
      const char* matched = nullptr;
      for (const char* p : kMulti) {
        if (s.compare(i, std::strlen(p), p) == 0) {
          matched = p;
          break;
        }
      }
      if (matched) {
        t.text = matched;
        i += t.text.size();
      } else {
        static const std::string kSingles = "+-*/%<>!()[];,.{}:=";
        if (kSingles.find(c) == std::string::npos) {
          throw AcslSyntaxError(i, std::string("unexpected character '") + c + "'");
        }
        t.text.push_back(s[i++]);
      }
    }
    out.push_back(std::move(t));
  }
  Tok end;
  end.offset = s.size();
  out.push_back(std::move(end));
  return out;
}

// ---- parser ----

class AcslParser {
public:
  explicit AcslParser(const std::string& text) : toks_(tokenize(text)) {}

  AcslExprPtr parse_expression() {
    AcslExprPtr e = parse_implies();
    expect_end();
    return e;
  }

  PredicateTemplate parse_template() {
    PredicateTemplate t;
    if (match("predicate")) {
      t.kind = PredicateTemplate::Kind::Predicate;
    } else if (match("inductive")) {
      t.kind = PredicateTemplate::Kind::Inductive;
    } else {
      fail("expected 'predicate' or 'inductive'");
    }
    if (peek().kind != Tok::Kind::Ident) fail("expected a name");
    t.name = advance().text;
    expect("(");
    if (!check(")")) {
      for (;;) {
        t.params.push_back(parse_param());
        if (!match(",")) break;
      }
    }
    expect(")");

    if (t.kind == PredicateTemplate::Kind::Predicate) {
      expect("=");
      t.body = parse_implies();
      match(";");
    } else {
      expect("{");
      while (!check("}")) {
        if (!match("case")) fail("expected 'case'");
        if (peek().kind != Tok::Kind::Ident) fail("expected a case name");
        PredicateTemplate::Case c;
        c.name = advance().text;
        expect(":");
        c.formula = parse_implies();
        expect(";");
        t.cases.push_back(std::move(c));
      }
      expect("}");
      match(";");
      if (t.cases.empty()) fail("inductive definition needs at least one case");
    }
    expect_end();
    return t;
  }

private:
  const Tok& peek() const { return toks_[pos_]; }
  const Tok& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool check(const char* s) const { return peek().text == s; }
  bool match(const char* s) {
    if (!check(s)) return false;
    advance();
    return true;
  }
  void expect(const char* s) {
    if (!match(s)) fail(std::string("expected '") + s + "'");
  }
  void expect_end() {
    if (peek().kind != Tok::Kind::End) fail("trailing input");
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw AcslSyntaxError(peek().offset, msg);
  }

  std::pair<std::string, std::string> parse_param() {
    // the last identifier before ',' or ')' is the parameter name
    std::vector<Tok> run;
    while (!check(",") && !check(")")) {
      if (peek().kind == Tok::Kind::End) fail("unterminated parameter list");
      run.push_back(advance());
    }
    if (run.empty() || run.back().kind != Tok::Kind::Ident) fail("expected a parameter name");
    std::string name = run.back().text;
    std::string type;
    for (std::size_t i = 0; i + 1 < run.size(); ++i) {
      if (!type.empty()) type += " ";
      type += run[i].text;
    }
    if (type.empty()) fail("parameter '" + name + "' has no type");
    return {type, name};
  }

  AcslExprPtr parse_implies() {
    if (check("\\forall") || check("\\exists")) return parse_quant();
    AcslExprPtr lhs = parse_or();
    if (match("==>")) {
      auto e = std::make_shared<AcslExpr>();
      e->kind = AcslExpr::Kind::Binary;
      e->bin_op = BinOp::Implies;
      e->a = lhs;
      e->b = parse_implies();  // right associative
      return e;
    }
    return lhs;
  }

  AcslExprPtr parse_quant() {
    auto e = std::make_shared<AcslExpr>();
    e->kind = AcslExpr::Kind::Quant;
    e->quant = advance().text == "\\forall" ? Quantifier::Forall : Quantifier::Exists;
    std::string type;
    for (;;) {
      if (peek().kind == Tok::Kind::Ident && (check("integer") || check("int"))) {
        type = advance().text;
      }
      if (type.empty()) fail("expected 'integer' binder");
      if (peek().kind != Tok::Kind::Ident) fail("expected binder name");
      e->binders.emplace_back(type, advance().text);
      if (!match(",")) break;
    }
    expect(";");
    e->a = parse_implies();
    return e;
  }

  AcslExprPtr binary(BinOp op, AcslExprPtr a, AcslExprPtr b) {
    auto e = std::make_shared<AcslExpr>();
    e->kind = AcslExpr::Kind::Binary;
    e->bin_op = op;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
  }

  AcslExprPtr parse_or() {
    AcslExprPtr lhs = parse_and();
    while (match("||")) lhs = binary(BinOp::Or, lhs, parse_and());
    return lhs;
  }

  AcslExprPtr parse_and() {
    AcslExprPtr lhs = parse_rel();
    while (match("&&")) lhs = binary(BinOp::And, lhs, parse_rel());
    return lhs;
  }

  AcslExprPtr parse_rel() {
    AcslExprPtr first = parse_add();
    static const std::pair<const char*, RelOp> kRels[] = {
        {"<=", RelOp::Le}, {">=", RelOp::Ge}, {"==", RelOp::Eq},
        {"!=", RelOp::Ne}, {"<", RelOp::Lt},  {">", RelOp::Gt},
    };
    std::vector<AcslExprPtr> terms{first};
    std::vector<RelOp> ops;
    for (;;) {
      const RelOp* found = nullptr;
      for (const auto& [text, op] : kRels) {
        if (check(text)) {
          found = &op;
          advance();
          break;
        }
      }
      if (!found) break;
      ops.push_back(*found);
      terms.push_back(parse_add());
    }
    if (ops.empty()) return first;
    auto e = std::make_shared<AcslExpr>();
    e->kind = AcslExpr::Kind::RelChain;
    e->operands = std::move(terms);
    e->rel_ops = std::move(ops);
    return e;
  }

  AcslExprPtr parse_add() {
    AcslExprPtr lhs = parse_mul();
    for (;;) {
      if (match("+")) {
        lhs = binary(BinOp::Add, lhs, parse_mul());
      } else if (match("-")) {
        lhs = binary(BinOp::Sub, lhs, parse_mul());
      } else {
        break;
      }
    }
    return lhs;
  }

  AcslExprPtr parse_mul() {
    AcslExprPtr lhs = parse_unary();
    for (;;) {
      if (match("*")) {
        lhs = binary(BinOp::Mul, lhs, parse_unary());
      } else if (match("/")) {
        lhs = binary(BinOp::Div, lhs, parse_unary());
      } else if (match("%")) {
        lhs = binary(BinOp::Mod, lhs, parse_unary());
      } else {
        break;
      }
    }
    return lhs;
  }

  AcslExprPtr unary(AcslExpr::Kind kind, UnOp op, AcslExprPtr operand) {
    auto e = std::make_shared<AcslExpr>();
    e->kind = kind;
    e->un_op = op;
    e->a = std::move(operand);
    return e;
  }

  AcslExprPtr parse_unary() {
    if (match("-")) return unary(AcslExpr::Kind::Unary, UnOp::Neg, parse_unary());
    if (match("!")) return unary(AcslExpr::Kind::Unary, UnOp::Not, parse_unary());
    if (match("*")) return unary(AcslExpr::Kind::Deref, UnOp::Neg, parse_unary());
    return parse_postfix();
  }

  AcslExprPtr parse_postfix() {
    AcslExprPtr e = parse_primary();
    for (;;) {
      if (check("->") || check(".")) {
        bool arrow = advance().text == "->";
        if (peek().kind != Tok::Kind::Ident) fail("expected field name");
        auto m = std::make_shared<AcslExpr>();
        m->kind = AcslExpr::Kind::Member;
        m->arrow = arrow;
        m->name = advance().text;
        m->a = e;
        e = m;
      } else if (match("[")) {
        auto m = std::make_shared<AcslExpr>();
        m->kind = AcslExpr::Kind::Index;
        m->a = e;
        m->b = parse_implies();
        expect("]");
        e = m;
      } else {
        break;
      }
    }
    return e;
  }

  AcslExprPtr parse_primary() {
    const Tok& t = peek();
    if (t.kind == Tok::Kind::IntLit) {
      advance();
      auto e = std::make_shared<AcslExpr>();
      e->kind = AcslExpr::Kind::IntLit;
      e->int_value = t.value;
      return e;
    }
    if (t.kind == Tok::Kind::Ident) {
      if (t.text == "\\true" || t.text == "\\false") {
        advance();
        auto e = std::make_shared<AcslExpr>();
        e->kind = AcslExpr::Kind::BoolLit;
        e->bool_value = t.text == "\\true";
        return e;
      }
      if (t.text == "\\null" || t.text == "NULL") {
        advance();
        auto e = std::make_shared<AcslExpr>();
        e->kind = AcslExpr::Kind::NullLit;
        return e;
      }
      if (t.text == "\\valid") {
        advance();
        expect("(");
        auto e = std::make_shared<AcslExpr>();
        e->kind = AcslExpr::Kind::Valid;
        e->a = parse_implies();
        expect(")");
        return e;
      }
      if (t.text == "\\at") {
        advance();
        expect("(");
        auto e = std::make_shared<AcslExpr>();
        e->kind = AcslExpr::Kind::At;
        e->a = parse_implies();
        expect(",");
        if (peek().kind != Tok::Kind::Ident) fail("expected a label");
        e->name = advance().text;
        expect(")");
        return e;
      }
      if (t.text[0] == '\\') fail("unsupported construct '" + t.text + "'");
      advance();
      if (match("(")) {
        auto e = std::make_shared<AcslExpr>();
        e->kind = AcslExpr::Kind::PredApp;
        e->name = t.text;
        if (!check(")")) {
          for (;;) {
            e->operands.push_back(parse_implies());
            if (!match(",")) break;
          }
        }
        expect(")");
        return e;
      }
      auto e = std::make_shared<AcslExpr>();
      e->kind = AcslExpr::Kind::Var;
      e->name = t.text;
      return e;
    }
    if (match("(")) {
      AcslExprPtr inner = parse_implies();
      expect(")");
      return inner;
    }
    fail(t.kind == Tok::Kind::End ? "unexpected end of input"
                                  : "unexpected '" + t.text + "'");
  }

  std::vector<Tok> toks_;
  std::size_t pos_ = 0;
};

// ---- rendering ----

int prec(const AcslExpr& e) {
  switch (e.kind) {
    case AcslExpr::Kind::Quant: return 1;
    case AcslExpr::Kind::Binary:
      switch (e.bin_op) {
        case BinOp::Implies: return 2;
        case BinOp::Or: return 3;
        case BinOp::And: return 4;
        case BinOp::Add:
        case BinOp::Sub: return 6;
        case BinOp::Mul:
        case BinOp::Div:
        case BinOp::Mod: return 7;
      }
      return 2;
    case AcslExpr::Kind::RelChain: return 5;
    case AcslExpr::Kind::Unary:
    case AcslExpr::Kind::Deref: return 8;
    default: return 9;
  }
}

const char* rel_text(RelOp op) {
  switch (op) {
    case RelOp::Lt: return "<";
    case RelOp::Le: return "<=";
    case RelOp::Gt: return ">";
    case RelOp::Ge: return ">=";
    case RelOp::Eq: return "==";
    case RelOp::Ne: return "!=";
  }
  return "<";
}

void render_into(const AcslExpr& e, int min_prec, std::string& out);

void render_child(const AcslExprPtr& e, int min_prec, std::string& out) {
  render_into(*e, min_prec, out);
}

void render_into(const AcslExpr& e, int min_prec, std::string& out) {
  const int p = prec(e);
  const bool parens = p < min_prec;
  if (parens) out += "(";
  switch (e.kind) {
    case AcslExpr::Kind::IntLit:
      out += std::to_string(e.int_value);
      break;
    case AcslExpr::Kind::BoolLit:
      out += e.bool_value ? "\\true" : "\\false";
      break;
    case AcslExpr::Kind::NullLit:
      out += "\\null";
      break;
    case AcslExpr::Kind::Var:
      out += e.name;
      break;
    case AcslExpr::Kind::Member:
      render_child(e.a, 9, out);
      out += e.arrow ? "->" : ".";
      out += e.name;
      break;
    case AcslExpr::Kind::Index:
      render_child(e.a, 9, out);
      out += "[";
      render_child(e.b, 1, out);
      out += "]";
      break;
    case AcslExpr::Kind::Deref:
      out += "*";
      render_child(e.a, 8, out);
      break;
    case AcslExpr::Kind::Unary:
      out += e.un_op == UnOp::Neg ? "-" : "!";
      render_child(e.a, 8, out);
      break;
    case AcslExpr::Kind::Binary: {
      const char* op = nullptr;
      switch (e.bin_op) {
        case BinOp::Add: op = " + "; break;
        case BinOp::Sub: op = " - "; break;
        case BinOp::Mul: op = " * "; break;
        case BinOp::Div: op = " / "; break;
        case BinOp::Mod: op = " % "; break;
        case BinOp::And: op = " && "; break;
        case BinOp::Or: op = " || "; break;
        case BinOp::Implies: op = " ==> "; break;
      }
      if (e.bin_op == BinOp::Implies) {
        render_child(e.a, p + 1, out);
        out += op;
        render_child(e.b, p, out);  // right associative
      } else {
        render_child(e.a, p, out);
        out += op;
        render_child(e.b, p + 1, out);
      }
      break;
    }
    case AcslExpr::Kind::RelChain:
      for (std::size_t i = 0; i < e.operands.size(); ++i) {
        if (i > 0) {
          out += " ";
          out += rel_text(e.rel_ops[i - 1]);
          out += " ";
        }
        render_child(e.operands[i], 6, out);
      }
      break;
    case AcslExpr::Kind::Quant:
      out += e.quant == Quantifier::Forall ? "\\forall " : "\\exists ";
      for (std::size_t i = 0; i < e.binders.size(); ++i) {
        if (i > 0) out += ", ";
        out += e.binders[i].first + " " + e.binders[i].second;
      }
      out += "; ";
      render_child(e.a, 1, out);
      break;
    case AcslExpr::Kind::Valid:
      out += "\\valid(";
      render_child(e.a, 1, out);
      out += ")";
      break;
    case AcslExpr::Kind::At:
      out += "\\at(";
      render_child(e.a, 1, out);
      out += ", " + e.name + ")";
      break;
    case AcslExpr::Kind::PredApp:
      out += e.name + "(";
      for (std::size_t i = 0; i < e.operands.size(); ++i) {
        if (i > 0) out += ", ";
        render_child(e.operands[i], 1, out);
      }
      out += ")";
      break;
  }
  if (parens) out += ")";
}

std::string join_param(const std::pair<std::string, std::string>& p) {
  const auto& [type, name] = p;
  return type.back() == '*' ? type + name : type + " " + name;
}

}  // namespace

AcslExprPtr parse_acsl_expr(const std::string& text) {
  return AcslParser(text).parse_expression();
}

std::string render(const AcslExpr& e) {
  std::string out;
  render_into(e, 1, out);
  return out;
}

std::string render(const AcslExprPtr& e) { return render(*e); }

bool equal(const AcslExpr& x, const AcslExpr& y) {
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case AcslExpr::Kind::IntLit: return x.int_value == y.int_value;
    case AcslExpr::Kind::BoolLit: return x.bool_value == y.bool_value;
    case AcslExpr::Kind::NullLit: return true;
    case AcslExpr::Kind::Var: return x.name == y.name;
    case AcslExpr::Kind::Member:
      return x.name == y.name && x.arrow == y.arrow && equal(x.a, y.a);
    case AcslExpr::Kind::Index: return equal(x.a, y.a) && equal(x.b, y.b);
    case AcslExpr::Kind::Deref: return equal(x.a, y.a);
    case AcslExpr::Kind::Unary: return x.un_op == y.un_op && equal(x.a, y.a);
    case AcslExpr::Kind::Binary:
      return x.bin_op == y.bin_op && equal(x.a, y.a) && equal(x.b, y.b);
    case AcslExpr::Kind::RelChain: {
      if (x.rel_ops != y.rel_ops || x.operands.size() != y.operands.size()) return false;
      for (std::size_t i = 0; i < x.operands.size(); ++i) {
        if (!equal(x.operands[i], y.operands[i])) return false;
      }
      return true;
    }
    case AcslExpr::Kind::Quant:
      return x.quant == y.quant && x.binders == y.binders && equal(x.a, y.a);
    case AcslExpr::Kind::Valid: return equal(x.a, y.a);
    case AcslExpr::Kind::At: return x.name == y.name && equal(x.a, y.a);
    case AcslExpr::Kind::PredApp: {
      if (x.name != y.name || x.operands.size() != y.operands.size()) return false;
      for (std::size_t i = 0; i < x.operands.size(); ++i) {
        if (!equal(x.operands[i], y.operands[i])) return false;
      }
      return true;
    }
  }
  return false;
}

bool equal(const AcslExprPtr& x, const AcslExprPtr& y) {
  if (!x || !y) return x == y;
  return equal(*x, *y);
}

namespace {

void free_vars_rec(const AcslExpr& e, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (e.kind) {
    case AcslExpr::Kind::Var:
      if (!bound.count(e.name)) out.insert(e.name);
      break;
    case AcslExpr::Kind::Quant: {
      std::vector<std::string> added;
      for (const auto& [type, name] : e.binders) {
        (void)type;
        if (bound.insert(name).second) added.push_back(name);
      }
      free_vars_rec(*e.a, bound, out);
      for (const auto& name : added) bound.erase(name);
      break;
    }
    default:
      if (e.a) free_vars_rec(*e.a, bound, out);
      if (e.b) free_vars_rec(*e.b, bound, out);
      for (const auto& op : e.operands) free_vars_rec(*op, bound, out);
      break;
  }
}

}  // namespace

void free_vars(const AcslExpr& e, std::set<std::string>& out) {
  std::set<std::string> bound;
  free_vars_rec(e, bound, out);
}

void pred_names(const AcslExpr& e, std::set<std::string>& out) {
  if (e.kind == AcslExpr::Kind::PredApp) out.insert(e.name);
  if (e.a) pred_names(*e.a, out);
  if (e.b) pred_names(*e.b, out);
  for (const auto& op : e.operands) pred_names(*op, out);
}

Invariant Invariant::from(AcslExprPtr e) {
  Invariant inv;
  inv.text = render(e);
  inv.expr = std::move(e);
  return inv;
}

std::string render_loop_annotation(const std::vector<Invariant>& invariants) {
  if (invariants.empty()) return {};
  if (invariants.size() == 1) {
    return "/*@ loop invariant " + invariants[0].text + "; */";
  }
  std::string out = "/*@\n";
  for (const auto& inv : invariants) {
    out += "  loop invariant " + inv.text + ";\n";
  }
  out += "*/";
  return out;
}

std::string PredicateTemplate::render() const {
  std::string out;
  std::string sig = name + "(";
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i > 0) sig += ", ";
    sig += join_param(params[i]);
  }
  sig += ")";
  if (kind == Kind::Predicate) {
    return "/*@ predicate " + sig + " = " + acsl::render(body) + "; */";
  }
  out = "/*@ inductive " + sig + " {\n";
  for (const auto& c : cases) {
    out += "  case " + c.name + ": " + acsl::render(c.formula) + ";\n";
  }
  out += "} */";
  return out;
}

PredicateTemplate parse_predicate_template(const std::string& text) {
  // tolerate the comment wrapper
  std::string body = text;
  auto trim = [](std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    std::size_t e = s.find_last_not_of(" \t\r\n");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  trim(body);
  if (body.rfind("/*@", 0) == 0) body = body.substr(3);
  else if (body.rfind("/*", 0) == 0) body = body.substr(2);
  if (body.size() >= 2 && body.compare(body.size() - 2, 2, "*/") == 0) {
    body = body.substr(0, body.size() - 2);
  }
  return AcslParser(body).parse_template();
}

}  // namespace acinv::acsl
