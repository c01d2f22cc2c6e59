#include "acinv/parser.hpp"

#include <algorithm>
#include <set>

#include "acinv/lexer.hpp"

namespace acinv::c {

namespace {

const std::set<std::string> kScalarTypes = {
    "int", "unsigned", "long", "short", "char", "size_t",
    "int8_t", "int16_t", "int32_t", "int64_t",
    "uint8_t", "uint16_t", "uint32_t", "uint64_t",
    "ssize_t", "ptrdiff_t", "void",
};

const std::set<std::string> kKeywords = {
    "struct", "typedef", "if", "else", "while", "do", "for", "return",
    "break", "continue", "const", "static", "NULL",
};

class Parser {
public:
  Parser(const std::string& source, LexResult lexed)
      : toks_(std::move(lexed.tokens)) {
    ast_.source_text = source;
    ast_.defines = std::move(lexed.defines);
    ast_.line_count = lexed.line_count;
  }

  Ast run() {
    while (!at_end()) {
      parse_top_level();
    }
    return std::move(ast_);
  }

private:
  // ---- token plumbing ----
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool at_end() const { return peek().kind == Token::Kind::End; }
  const Token& advance() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool check(const char* text) const { return peek().text == text; }
  bool match(const char* text) {
    if (!check(text)) return false;
    advance();
    return true;
  }
  const Token& expect(const char* text, const char* what) {
    if (!check(text)) {
      throw ParseError(peek().span, std::string("expected '") + text + "' " + what +
                                        ", found '" + describe(peek()) + "'");
    }
    return advance();
  }
  static std::string describe(const Token& t) {
    return t.kind == Token::Kind::End ? "<end of input>" : t.text;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(peek().span, msg); }

  bool is_type_name(const std::string& s) const {
    return kScalarTypes.count(s) > 0 || struct_names_.count(s) > 0 ||
           ast_.typedefs.count(s) > 0;
  }

  // A statement starts a declaration if it begins with a type spec followed by
  // a declarator ('*'s then an identifier).
  bool starts_decl() const {
    std::size_t i = 0;
    while (peek(i).is_ident("const") || peek(i).is_ident("static")) ++i;
    if (peek(i).is_ident("struct")) return true;
    if (peek(i).kind != Token::Kind::Ident || !is_type_name(peek(i).text)) return false;
    if (peek(i).is_ident("unsigned") || peek(i).is_ident("long") || peek(i).is_ident("short")) {
      return true;
    }
    ++i;
    while (peek(i).is("*")) ++i;
    return peek(i).kind == Token::Kind::Ident && kKeywords.count(peek(i).text) == 0;
  }

  // ---- types ----
  TypeRef parse_type_spec() {
    while (match("const") || match("static")) {
    }
    TypeRef t;
    if (match("struct")) {
      t.is_struct = true;
      if (peek().kind != Token::Kind::Ident) fail("expected struct name");
      t.base = advance().text;
      return t;
    }
    if (peek().kind != Token::Kind::Ident || !is_type_name(peek().text)) {
      fail("expected a type name, found '" + describe(peek()) + "'");
    }
    std::string word = advance().text;
    if (word == "unsigned" || word == "long" || word == "short") {
      // absorb multi-word forms: unsigned int, unsigned long long, ...
      std::string full = word;
      while (peek().kind == Token::Kind::Ident &&
             (peek().is_ident("int") || peek().is_ident("long") || peek().is_ident("char") ||
              peek().is_ident("short"))) {
        full += " " + advance().text;
      }
      t.base = full;
      return t;
    }
    t.base = word;
    if (ast_.typedefs.count(word) && ast_.typedefs.at(word).is_struct) t.is_struct = true;
    return t;
  }

  TypeRef with_pointers(TypeRef t) {
    while (match("*")) {
      ++t.pointer_depth;
      while (match("const")) {
      }
    }
    return t;
  }

  // ---- top level ----
  void parse_top_level() {
    if (check("typedef")) {
      parse_typedef();
      return;
    }
    if (check("struct") && peek(1).kind == Token::Kind::Ident && peek(2).is("{")) {
      parse_composite(/*typedef_name=*/nullptr);
      expect(";", "after struct declaration");
      return;
    }
    parse_function();
  }

  void parse_typedef() {
    const Token& kw = advance();  // typedef
    if (check("struct") && (peek(1).is("{") || peek(2).is("{"))) {
      CompositeDecl* decl = parse_composite_body(kw.span);
      if (peek().kind != Token::Kind::Ident) fail("expected typedef name");
      std::string alias = advance().text;
      if (decl->name.empty()) decl->name = alias;
      TypeRef t;
      t.base = decl->name;
      t.is_struct = true;
      ast_.typedefs[alias] = t;
      struct_names_.insert(alias);
      expect(";", "after typedef");
      return;
    }
    TypeRef underlying = with_pointers(parse_type_spec());
    if (peek().kind != Token::Kind::Ident) fail("expected typedef name");
    std::string alias = advance().text;
    ast_.typedefs[alias] = underlying;
    expect(";", "after typedef");
  }

  CompositeDecl* parse_composite(const char* typedef_name) {
    (void)typedef_name;
    const Token& kw = peek();
    return parse_composite_body(kw.span);
  }

  CompositeDecl* parse_composite_body(SourceSpan start) {
    expect("struct", "to begin struct declaration");
    CompositeDecl decl;
    decl.span.start_line = start.start_line;
    decl.span.start_col = start.start_col;
    if (peek().kind == Token::Kind::Ident && !check("{")) decl.name = advance().text;
    expect("{", "to open struct body");
    std::set<std::string> seen;
    while (!check("}")) {
      if (at_end()) fail("unterminated struct body");
      TypeRef base = parse_type_spec();
      for (;;) {
        TypeRef member_type = with_pointers(base);
        if (peek().kind != Token::Kind::Ident) fail("expected member name");
        const Token& name_tok = advance();
        if (!seen.insert(name_tok.text).second) {
          throw ParseError(name_tok.span, "duplicate member '" + name_tok.text + "'");
        }
        if (match("[")) {
          member_type.is_array = true;
          if (!check("]")) member_type.array_size = advance().text;
          expect("]", "to close array member");
        }
        decl.members.emplace_back(name_tok.text, member_type);
        if (!match(",")) break;
      }
      expect(";", "after struct member");
    }
    const Token& close = expect("}", "to close struct body");
    decl.span.end_line = close.span.end_line;
    decl.span.end_col = close.span.end_col;
    if (!decl.name.empty()) struct_names_.insert(decl.name);
    ast_.type_decls.push_back(std::move(decl));
    return &ast_.type_decls.back();
  }

  void parse_function() {
    SourceSpan start = peek().span;
    TypeRef ret = with_pointers(parse_type_spec());
    if (peek().kind != Token::Kind::Ident) fail("expected function name");
    std::string name = advance().text;
    expect("(", "to open parameter list");

    FunctionDef fn;
    fn.name = std::move(name);
    fn.return_type = ret;
    fn.span.start_line = start.start_line;
    fn.span.start_col = start.start_col;

    std::set<std::string> seen;
    if (!check(")")) {
      if (check("void") && peek(1).is(")")) {
        advance();
      } else {
        for (;;) {
          TypeRef pt = with_pointers(parse_type_spec());
          if (peek().kind != Token::Kind::Ident) fail("expected parameter name");
          const Token& pname = advance();
          if (!seen.insert(pname.text).second) {
            throw ParseError(pname.span, "duplicate parameter '" + pname.text + "'");
          }
          if (match("[")) {
            pt.is_array = true;
            if (!check("]")) pt.array_size = advance().text;
            expect("]", "to close array parameter");
          }
          fn.params.push_back({pname.text, pt, pt.is_pointer_like()});
          if (!match(",")) break;
        }
      }
    }
    expect(")", "to close parameter list");

    if (match(";")) {
      fn.span.end_line = toks_[pos_ - 1].span.end_line;
      fn.span.end_col = toks_[pos_ - 1].span.end_col;
      ast_.functions.push_back(std::move(fn));
      return;
    }
    fn.body = parse_block();
    fn.span.end_line = fn.body->span.end_line;
    fn.span.end_col = fn.body->span.end_col;
    ast_.functions.push_back(std::move(fn));
  }

  // ---- statements ----
  StmtPtr parse_block() {
    const Token& open = expect("{", "to open block");
    auto block = std::make_unique<Stmt>();
    block->kind = Stmt::Kind::Block;
    block->span.start_line = open.span.start_line;
    block->span.start_col = open.span.start_col;
    while (!check("}")) {
      if (at_end()) fail("unterminated block");
      parse_stmt_into(block->stmts);
    }
    const Token& close = advance();
    block->span.end_line = close.span.end_line;
    block->span.end_col = close.span.end_col;
    return block;
  }

  // Parses one statement; may append several (for-loop desugaring emits the
  // init statement followed by the while node).
  void parse_stmt_into(std::vector<StmtPtr>& out) {
    if (check("{")) {
      out.push_back(parse_block());
      return;
    }
    if (check(";")) {
      auto s = std::make_unique<Stmt>();
      s->kind = Stmt::Kind::Empty;
      s->span = advance().span;
      out.push_back(std::move(s));
      return;
    }
    if (check("if")) {
      out.push_back(parse_if());
      return;
    }
    if (check("while")) {
      out.push_back(parse_while());
      return;
    }
    if (check("do")) {
      out.push_back(parse_do_while());
      return;
    }
    if (check("for")) {
      parse_for_into(out);
      return;
    }
    if (check("return")) {
      auto s = std::make_unique<Stmt>();
      s->kind = Stmt::Kind::Return;
      s->span = advance().span;
      if (!check(";")) s->ret_value = parse_expr();
      const Token& semi = expect(";", "after return");
      s->span.end_line = semi.span.end_line;
      s->span.end_col = semi.span.end_col;
      out.push_back(std::move(s));
      return;
    }
    if (check("break") || check("continue")) {
      auto s = std::make_unique<Stmt>();
      s->kind = check("break") ? Stmt::Kind::Break : Stmt::Kind::Continue;
      s->span = advance().span;
      const Token& semi = expect(";", "after jump statement");
      s->span.end_line = semi.span.end_line;
      s->span.end_col = semi.span.end_col;
      out.push_back(std::move(s));
      return;
    }
    if (starts_decl()) {
      parse_decl_into(out, /*stop_at_semi=*/true);
      return;
    }
    out.push_back(parse_expr_stmt(/*consume_semi=*/true));
  }

  void parse_decl_into(std::vector<StmtPtr>& out, bool stop_at_semi) {
    SourceSpan start = peek().span;
    TypeRef base = parse_type_spec();
    for (;;) {
      auto s = std::make_unique<Stmt>();
      s->kind = Stmt::Kind::Decl;
      s->span.start_line = start.start_line;
      s->span.start_col = start.start_col;
      s->decl_type = with_pointers(base);
      if (peek().kind != Token::Kind::Ident) fail("expected variable name");
      s->decl_name = advance().text;
      if (match("[")) {
        s->decl_type.is_array = true;
        if (!check("]")) s->decl_type.array_size = advance().text;
        expect("]", "to close array declarator");
      }
      if (match("=")) s->init = parse_expr();
      SourceSpan last = toks_[pos_ - 1].span;
      s->span.end_line = last.end_line;
      s->span.end_col = last.end_col;
      out.push_back(std::move(s));
      if (!match(",")) break;
    }
    if (stop_at_semi) expect(";", "after declaration");
  }

  StmtPtr parse_if() {
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::If;
    s->span = advance().span;  // if
    expect("(", "after if");
    s->cond = parse_expr();
    expect(")", "to close if condition");
    std::vector<StmtPtr> then_stmts;
    parse_stmt_into(then_stmts);
    s->then_branch = wrap_stmts(std::move(then_stmts));
    if (match("else")) {
      std::vector<StmtPtr> else_stmts;
      parse_stmt_into(else_stmts);
      s->else_branch = wrap_stmts(std::move(else_stmts));
    }
    const Stmt* last = s->else_branch ? s->else_branch.get() : s->then_branch.get();
    s->span.end_line = last->span.end_line;
    s->span.end_col = last->span.end_col;
    return s;
  }

  StmtPtr parse_while() {
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::While;
    s->loop_form = LoopForm::While;
    s->span = advance().span;  // while
    expect("(", "after while");
    s->guard = parse_expr();
    expect(")", "to close loop guard");
    std::vector<StmtPtr> body;
    parse_stmt_into(body);
    s->body = wrap_stmts(std::move(body));
    s->span.end_line = s->body->span.end_line;
    s->span.end_col = s->body->span.end_col;
    return s;
  }

  StmtPtr parse_do_while() {
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::While;
    s->loop_form = LoopForm::DoWhile;
    s->span = advance().span;  // do
    std::vector<StmtPtr> body;
    parse_stmt_into(body);
    s->body = wrap_stmts(std::move(body));
    expect("while", "after do body");
    expect("(", "after while");
    s->guard = parse_expr();
    expect(")", "to close loop guard");
    const Token& semi = expect(";", "after do-while");
    s->span.end_line = semi.span.end_line;
    s->span.end_col = semi.span.end_col;
    return s;
  }

  void parse_for_into(std::vector<StmtPtr>& out) {
    SourceSpan for_span = advance().span;  // for
    expect("(", "after for");

    // init lands in the enclosing block, before the desugared while
    if (!check(";")) {
      if (starts_decl()) {
        parse_decl_into(out, /*stop_at_semi=*/false);
      } else {
        out.push_back(parse_expr_stmt(/*consume_semi=*/false));
      }
    }
    expect(";", "after for-init");

    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::While;
    s->loop_form = LoopForm::For;
    s->span = for_span;
    if (check(";")) {
      auto truth = std::make_unique<Expr>();
      truth->kind = Expr::Kind::IntLit;
      truth->int_value = 1;
      truth->span = peek().span;
      s->guard = std::move(truth);
    } else {
      s->guard = parse_expr();
    }
    expect(";", "after for-condition");

    StmtPtr step;
    if (!check(")")) step = parse_expr_stmt(/*consume_semi=*/false);
    expect(")", "to close for header");

    std::vector<StmtPtr> body_stmts;
    parse_stmt_into(body_stmts);
    StmtPtr body = wrap_stmts(std::move(body_stmts));
    s->span.end_line = body->span.end_line;
    s->span.end_col = body->span.end_col;

    // body; step
    auto block = std::make_unique<Stmt>();
    block->kind = Stmt::Kind::Block;
    block->span = body->span;
    block->stmts.push_back(std::move(body));
    if (step) block->stmts.push_back(std::move(step));
    s->body = std::move(block);
    out.push_back(std::move(s));
  }

  StmtPtr wrap_stmts(std::vector<StmtPtr> stmts) {
    if (stmts.size() == 1) return std::move(stmts.front());
    auto block = std::make_unique<Stmt>();
    block->kind = Stmt::Kind::Block;
    if (!stmts.empty()) {
      block->span = stmts.front()->span;
      block->span.end_line = stmts.back()->span.end_line;
      block->span.end_col = stmts.back()->span.end_col;
    }
    block->stmts = std::move(stmts);
    return block;
  }

  static bool is_lvalue(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Var:
      case Expr::Kind::Member:
      case Expr::Kind::Index:
        return true;
      case Expr::Kind::Unary:
        return e.unary_op == UnaryOp::Deref;
      default:
        return false;
    }
  }

  // Expression statement in the subset: assignment, compound assignment,
  // increment/decrement, or a call.
  StmtPtr parse_expr_stmt(bool consume_semi) {
    SourceSpan start = peek().span;
    ExprPtr first = parse_expr();
    auto s = std::make_unique<Stmt>();
    s->span = start;

    static const std::pair<const char*, AssignOp> kCompound[] = {
        {"+=", AssignOp::Add},    {"-=", AssignOp::Sub},    {"*=", AssignOp::Mul},
        {"/=", AssignOp::Div},    {"%=", AssignOp::Mod},    {"<<=", AssignOp::Shl},
        {">>=", AssignOp::Shr},   {"&=", AssignOp::BitAnd}, {"|=", AssignOp::BitOr},
        {"^=", AssignOp::BitXor},
    };

    if (check("=")) {
      if (!is_lvalue(*first)) throw ParseError(first->span, "assignment target is not an lvalue");
      advance();
      s->kind = Stmt::Kind::Assign;
      s->target = std::move(first);
      s->value = parse_expr();
    } else {
      bool compound = false;
      for (const auto& [text, op] : kCompound) {
        if (check(text)) {
          if (!is_lvalue(*first)) {
            throw ParseError(first->span, "assignment target is not an lvalue");
          }
          advance();
          s->kind = Stmt::Kind::CompoundAssign;
          s->assign_op = op;
          s->target = std::move(first);
          s->value = parse_expr();
          compound = true;
          break;
        }
      }
      if (!compound) {
        if (first->kind == Expr::Kind::Unary &&
            (first->unary_op == UnaryOp::PreInc || first->unary_op == UnaryOp::PreDec ||
             first->unary_op == UnaryOp::PostInc || first->unary_op == UnaryOp::PostDec)) {
          s->kind = Stmt::Kind::IncrDecr;
          s->incr_op = first->unary_op;
          s->target = std::move(first->lhs);
        } else if (first->kind == Expr::Kind::Call) {
          s->kind = Stmt::Kind::Call;
          s->call = std::move(first);
        } else {
          throw ParseError(first->span,
                           "expression statements must be an assignment, ++/--, or a call");
        }
      }
    }

    SourceSpan last = toks_[pos_ - 1].span;
    if (consume_semi) {
      const Token& semi = expect(";", "after statement");
      last = semi.span;
    }
    s->span.end_line = last.end_line;
    s->span.end_col = last.end_col;
    return s;
  }

  // ---- expressions (precedence climbing) ----
  ExprPtr parse_expr() { return parse_binary(0); }

  struct OpInfo {
    const char* text;
    BinaryOp op;
    int prec;
  };
  static constexpr OpInfo kBinaryOps[] = {
      {"||", BinaryOp::Or, 1},     {"&&", BinaryOp::And, 2},
      {"|", BinaryOp::BitOr, 3},   {"^", BinaryOp::BitXor, 4},
      {"&", BinaryOp::BitAnd, 5},  {"==", BinaryOp::Eq, 6},
      {"!=", BinaryOp::Ne, 6},     {"<", BinaryOp::Lt, 7},
      {"<=", BinaryOp::Le, 7},     {">", BinaryOp::Gt, 7},
      {">=", BinaryOp::Ge, 7},     {"<<", BinaryOp::Shl, 8},
      {">>", BinaryOp::Shr, 8},    {"+", BinaryOp::Add, 9},
      {"-", BinaryOp::Sub, 9},     {"*", BinaryOp::Mul, 10},
      {"/", BinaryOp::Div, 10},    {"%", BinaryOp::Mod, 10},
  };

  const OpInfo* peek_binary_op() const {
    if (peek().kind != Token::Kind::Punct) return nullptr;
    for (const auto& info : kBinaryOps) {
      if (peek().text == info.text) return &info;
    }
    return nullptr;
  }

  ExprPtr parse_binary(int min_prec) {
    ExprPtr lhs = parse_unary();
    for (;;) {
      const OpInfo* info = peek_binary_op();
      if (!info || info->prec < min_prec) break;
      advance();
      ExprPtr rhs = parse_binary(info->prec + 1);
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::Binary;
      e->binary_op = info->op;
      e->span = lhs->span;
      e->span.end_line = rhs->span.end_line;
      e->span.end_col = rhs->span.end_col;
      e->lhs = std::move(lhs);
      e->rhs = std::move(rhs);
      lhs = std::move(e);
    }
    return lhs;
  }

  ExprPtr make_unary(UnaryOp op, SourceSpan start, ExprPtr operand) {
    auto e = std::make_unique<Expr>();
    e->kind = Expr::Kind::Unary;
    e->unary_op = op;
    e->span = start;
    e->span.end_line = operand->span.end_line;
    e->span.end_col = operand->span.end_col;
    e->lhs = std::move(operand);
    return e;
  }

  ExprPtr parse_unary() {
    SourceSpan start = peek().span;
    if (match("-")) return make_unary(UnaryOp::Neg, start, parse_unary());
    if (match("!")) return make_unary(UnaryOp::Not, start, parse_unary());
    if (match("~")) return make_unary(UnaryOp::BitNot, start, parse_unary());
    if (match("*")) return make_unary(UnaryOp::Deref, start, parse_unary());
    if (match("&")) return make_unary(UnaryOp::AddrOf, start, parse_unary());
    if (match("++")) return make_unary(UnaryOp::PreInc, start, parse_unary());
    if (match("--")) return make_unary(UnaryOp::PreDec, start, parse_unary());
    return parse_postfix();
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_primary();
    for (;;) {
      if (check("->") || check(".")) {
        bool arrow = advance().text == "->";
        if (peek().kind != Token::Kind::Ident) fail("expected member name");
        const Token& name = advance();
        auto m = std::make_unique<Expr>();
        m->kind = Expr::Kind::Member;
        m->arrow = arrow;
        m->name = name.text;
        m->span = e->span;
        m->span.end_line = name.span.end_line;
        m->span.end_col = name.span.end_col;
        m->lhs = std::move(e);
        e = std::move(m);
      } else if (check("[")) {
        advance();
        ExprPtr idx = parse_expr();
        const Token& close = expect("]", "to close subscript");
        auto m = std::make_unique<Expr>();
        m->kind = Expr::Kind::Index;
        m->span = e->span;
        m->span.end_line = close.span.end_line;
        m->span.end_col = close.span.end_col;
        m->lhs = std::move(e);
        m->rhs = std::move(idx);
        e = std::move(m);
      } else if (check("++") || check("--")) {
        UnaryOp op = advance().text == "++" ? UnaryOp::PostInc : UnaryOp::PostDec;
        SourceSpan span = e->span;
        e = make_unary(op, span, std::move(e));
      } else {
        break;
      }
    }
    return e;
  }

  ExprPtr parse_primary() {
    const Token& t = peek();
    if (t.kind == Token::Kind::IntLit) {
      advance();
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::IntLit;
      e->int_value = t.value;
      e->span = t.span;
      return e;
    }
    if (t.is_ident("NULL")) {
      advance();
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::NullLit;
      e->span = t.span;
      return e;
    }
    if (t.kind == Token::Kind::Ident) {
      if (kKeywords.count(t.text)) fail("unexpected keyword '" + t.text + "'");
      advance();
      if (check("(")) {
        advance();
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::Call;
        e->name = t.text;
        e->span = t.span;
        if (!check(")")) {
          for (;;) {
            e->args.push_back(parse_expr());
            if (!match(",")) break;
          }
        }
        const Token& close = expect(")", "to close call");
        e->span.end_line = close.span.end_line;
        e->span.end_col = close.span.end_col;
        return e;
      }
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::Var;
      e->name = t.text;
      e->span = t.span;
      return e;
    }
    if (match("(")) {
      ExprPtr inner = parse_expr();
      expect(")", "to close parenthesized expression");
      return inner;
    }
    fail("expected an expression, found '" + describe(t) + "'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Ast ast_;
  std::set<std::string> struct_names_;
};

}  // namespace

Ast parse_program(const std::string& source) {
  Parser parser(source, lex(source));
  return parser.run();
}

}  // namespace acinv::c
