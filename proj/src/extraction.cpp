#include "acinv/extraction.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "json.hpp"

namespace acinv {

using c::Ast;
using c::Expr;
using c::FunctionDef;
using c::LoopForm;
using c::Stmt;
using c::TypeRef;

namespace {

// ---- data structure facts ----

bool member_refers_to(const Ast& ast, const TypeRef& member, const std::string& name) {
  return ast.resolve(member).base == name;
}

std::vector<DataStructureFact> collect_facts(const Ast& ast, std::vector<Diagnostic>& diags) {
  std::vector<DataStructureFact> facts;
  std::set<std::string> declared;
  for (const auto& d : ast.type_decls) declared.insert(d.name);

  // struct reference graph, for spotting cycles that run through other structs
  std::map<std::string, std::set<std::string>> edges;
  for (const auto& d : ast.type_decls) {
    for (const auto& [mname, mtype] : d.members) {
      (void)mname;
      std::string target = ast.resolve(mtype).base;
      if (target != d.name && declared.count(target)) edges[d.name].insert(target);
    }
  }
  auto reaches = [&](const std::string& from, const std::string& to) {
    std::set<std::string> seen;
    std::vector<std::string> work{from};
    while (!work.empty()) {
      std::string cur = work.back();
      work.pop_back();
      for (const auto& next : edges[cur]) {
        if (next == to) return true;
        if (seen.insert(next).second) work.push_back(next);
      }
    }
    return false;
  };

  for (const auto& d : ast.type_decls) {
    DataStructureFact fact;
    fact.name = d.name;
    for (const auto& [mname, mtype] : d.members) {
      fact.fields.emplace_back(mname, mtype.to_string());
      if (member_refers_to(ast, mtype, d.name)) fact.recursive = true;
    }
    fact.definition = ast.slice(d.span);
    if (!fact.recursive && reaches(d.name, d.name)) {
      diags.push_back({Severity::Warning, d.span,
                       "struct " + d.name +
                           " is part of a mutually recursive group; treating it as non-recursive"});
    }
    facts.push_back(std::move(fact));
  }
  std::sort(facts.begin(), facts.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });
  return facts;
}

// ---- loop walk ----

class LoopWalker {
public:
  LoopWalker(const Ast& ast, ExtractionResult& out) : ast_(ast), out_(out) {}

  void run() {
    for (const auto& fn : ast_.functions) {
      if (!fn.body) continue;
      func_ = &fn;
      scope_.clear();
      for (const auto& p : fn.params) scope_.emplace_back(p.name, p.type);
      std::map<std::string, MutatedVar> top;
      std::vector<int> top_children;
      walk(*fn.body, top, top_children);
    }
  }

private:
  using MutMap = std::map<std::string, MutatedVar>;

  const TypeRef* lookup(const std::string& name) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
      if (it->first == name) return &it->second;
    }
    return nullptr;
  }

  void record(MutMap& muts, const std::string& name, MutationKind kind) {
    auto it = muts.find(name);
    if (it != muts.end()) {
      if (kind == MutationKind::Assigned) it->second.kind = MutationKind::Assigned;
      return;
    }
    MutatedVar v;
    v.name = name;
    v.kind = kind;
    if (const TypeRef* t = lookup(name)) {
      v.type_text = t->to_string();
      TypeRef r = ast_.resolve(*t);
      v.is_data_structure = r.is_struct || ast_.find_struct(r.base) != nullptr;
      bool pointer_to_scalar = r.pointer_depth > 0 && !v.is_data_structure;
      v.display = (r.is_array || pointer_to_scalar) ? name + "[]" : name;
    } else {
      v.display = name;
    }
    muts[name] = std::move(v);
  }

  void record_target(MutMap& muts, const Expr* target, MutationKind kind) {
    if (!target) return;
    if (const Expr* root = target->root_var()) record(muts, root->name, kind);
  }

  // Scans an expression for embedded mutations: ++/-- and arguments passed by
  // pointer into calls.
  void scan_expr(const Expr* e, MutMap& muts) {
    if (!e) return;
    switch (e->kind) {
      case Expr::Kind::Call: {
        const FunctionDef* callee = ast_.find_function(e->name);
        for (std::size_t i = 0; i < e->args.size(); ++i) {
          const Expr* arg = e->args[i].get();
          scan_expr(arg, muts);
          bool by_pointer = false;
          if (callee && i < callee->params.size()) {
            by_pointer = callee->params[i].is_pointer;
          } else if (arg->kind == Expr::Kind::Unary && arg->unary_op == c::UnaryOp::AddrOf) {
            by_pointer = true;
          } else if (arg->kind == Expr::Kind::Var) {
            const TypeRef* t = lookup(arg->name);
            by_pointer = t && t->is_pointer_like();
          }
          if (by_pointer) record_target(muts, arg, MutationKind::PointerArg);
        }
        break;
      }
      case Expr::Kind::Unary:
        if (e->unary_op == c::UnaryOp::PreInc || e->unary_op == c::UnaryOp::PreDec ||
            e->unary_op == c::UnaryOp::PostInc || e->unary_op == c::UnaryOp::PostDec) {
          record_target(muts, e->lhs.get(), MutationKind::Assigned);
        }
        scan_expr(e->lhs.get(), muts);
        break;
      default:
        scan_expr(e->lhs.get(), muts);
        scan_expr(e->rhs.get(), muts);
        for (const auto& a : e->args) scan_expr(a.get(), muts);
        break;
    }
  }

  void walk(const Stmt& s, MutMap& muts, std::vector<int>& children) {
    ++out_.stmt_visits;
    switch (s.kind) {
      case Stmt::Kind::Decl:
        scan_expr(s.init.get(), muts);
        scope_.emplace_back(s.decl_name, s.decl_type);
        // an initialized declaration inside a loop body assigns on every
        // iteration
        if (s.init) record(muts, s.decl_name, MutationKind::Assigned);
        break;
      case Stmt::Kind::Assign:
      case Stmt::Kind::CompoundAssign:
        record_target(muts, s.target.get(), MutationKind::Assigned);
        scan_expr(s.target.get(), muts);
        scan_expr(s.value.get(), muts);
        break;
      case Stmt::Kind::IncrDecr:
        record_target(muts, s.target.get(), MutationKind::Assigned);
        scan_expr(s.target.get(), muts);
        break;
      case Stmt::Kind::Call:
        scan_expr(s.call.get(), muts);
        break;
      case Stmt::Kind::If:
        scan_expr(s.cond.get(), muts);
        walk(*s.then_branch, muts, children);
        if (s.else_branch) walk(*s.else_branch, muts, children);
        break;
      case Stmt::Kind::While: {
        scan_expr(s.guard.get(), muts);
        MutMap body_muts;
        std::vector<int> body_children;
        const int my_depth = ++depth_;
        std::size_t scope_mark = scope_.size();
        walk(*s.body, body_muts, body_children);
        scope_.resize(scope_mark);
        --depth_;

        LoopInfo info;
        info.number = static_cast<int>(out_.loops.size()) + 1;
        info.function = func_->name;
        info.depth = my_depth;
        info.form = s.loop_form;
        info.span = s.span;
        info.guard_text = ast_.slice(s.guard->span);
        if (info.guard_text == ";") info.guard_text = "1";  // for (;;)
        info.annotation_line = s.span.start_line;
        info.inner_loops = body_children;
        for (auto& [name, var] : body_muts) {
          (void)name;
          info.mutated_vars.push_back(var);
        }
        for (const auto& [name, type] : scope_) {
          (void)type;
          info.scope_vars.push_back(name);
        }
        out_.loops.push_back(std::move(info));
        children.push_back(out_.loops.back().number);

        // the loop's mutations belong to every enclosing loop as well
        for (auto& [name, var] : body_muts) {
          auto it = muts.find(name);
          if (it == muts.end()) {
            muts[name] = var;
          } else if (var.kind == MutationKind::Assigned) {
            it->second.kind = MutationKind::Assigned;
          }
        }
        break;
      }
      case Stmt::Kind::Block: {
        std::size_t scope_mark = scope_.size();
        for (const auto& child : s.stmts) walk(*child, muts, children);
        scope_.resize(scope_mark);
        break;
      }
      case Stmt::Kind::Return:
        scan_expr(s.ret_value.get(), muts);
        break;
      case Stmt::Kind::Break:
      case Stmt::Kind::Continue:
      case Stmt::Kind::Empty:
        break;
    }
  }

  const Ast& ast_;
  ExtractionResult& out_;
  const FunctionDef* func_ = nullptr;
  int depth_ = 0;
  std::vector<std::pair<std::string, TypeRef>> scope_;
};

const char* form_name(LoopForm f) {
  switch (f) {
    case LoopForm::While: return "while";
    case LoopForm::For: return "for";
    case LoopForm::DoWhile: return "do-while";
  }
  return "while";
}

}  // namespace

const LoopInfo* ExtractionResult::find_loop(int number) const {
  for (const auto& l : loops) {
    if (l.number == number) return &l;
  }
  return nullptr;
}

ExtractionResult extract(const c::Ast& ast) {
  ExtractionResult out;
  out.data_structures = collect_facts(ast, out.diagnostics);
  LoopWalker(ast, out).run();
  return out;
}

std::string to_json(const ExtractionResult& result) {
  nlohmann::ordered_json j;
  j["data_structures"] = nlohmann::ordered_json::array();
  for (const auto& d : result.data_structures) {
    nlohmann::ordered_json fields = nlohmann::ordered_json::array();
    for (const auto& [name, type] : d.fields) {
      fields.push_back({{"name", name}, {"type", type}});
    }
    j["data_structures"].push_back({
        {"name", d.name},
        {"recursive", d.recursive},
        {"fields", std::move(fields)},
        {"definition", d.definition},
    });
  }
  j["loops"] = nlohmann::ordered_json::array();
  for (const auto& l : result.loops) {
    nlohmann::ordered_json vars = nlohmann::ordered_json::array();
    for (const auto& v : l.mutated_vars) {
      vars.push_back({
          {"name", v.name},
          {"display", v.display},
          {"type", v.type_text},
          {"data_structure", v.is_data_structure},
          {"how", v.kind == MutationKind::Assigned ? "assigned" : "pointer-arg"},
      });
    }
    j["loops"].push_back({
        {"number", l.number},
        {"function", l.function},
        {"depth", l.depth},
        {"form", form_name(l.form)},
        {"lines", {l.span.start_line, l.span.end_line}},
        {"guard", l.guard_text},
        {"variables", std::move(vars)},
        {"inner_loops", l.inner_loops},
    });
  }
  if (!result.diagnostics.empty()) {
    j["diagnostics"] = nlohmann::ordered_json::array();
    for (const auto& d : result.diagnostics) j["diagnostics"].push_back(to_string(d));
  }
  return j.dump(2);
}

}  // namespace acinv
