#include "acinv/dynamic_checker.hpp"

#include <algorithm>
#include <cstdlib>
#include <random>
#include <set>
#include <sstream>

namespace acinv::dyn {

namespace {

constexpr std::size_t kPairCapPerActivation = 128;
constexpr long long kQuantRangeCap = 2048;
constexpr long long kQuantBudget = 4096;
constexpr std::int64_t kArrayMemberCap = 70000;

struct TrapSignal {
    TrapKind kind;
    std::string message;
};

Value deep_copy(const Value& v) {
    Value out = v;
    if (v.kind == Value::Kind::Arr && v.arr) {
        out.arr = std::make_shared<std::vector<std::int64_t>>(*v.arr);
    }
    return out;
}

std::string render_value(const Value& v) {
    switch (v.kind) {
        case Value::Kind::Int:
            return std::to_string(v.i);
        case Value::Kind::Ptr:
            return v.ptr == 0 ? "null" : "node#" + std::to_string(v.ptr);
        case Value::Kind::Arr: {
            std::string out = "[";
            const auto& elems = *v.arr;
            const std::size_t shown = std::min<std::size_t>(elems.size(), 8);
            for (std::size_t i = 0; i < shown; ++i) {
                if (i) out += ", ";
                out += std::to_string(elems[i]);
            }
            if (elems.size() > shown) {
                out += ", ... (" + std::to_string(elems.size() - shown) + " more)";
            }
            return out + "]";
        }
    }
    return "?";
}

}  // namespace

Value Value::make_int(std::int64_t v) {
    Value out;
    out.kind = Kind::Int;
    out.i = v;
    return out;
}

Value Value::make_ptr(int id) {
    Value out;
    out.kind = Kind::Ptr;
    out.ptr = id;
    return out;
}

Value Value::make_arr(std::vector<std::int64_t> elems) {
    Value out;
    out.kind = Kind::Arr;
    out.arr = std::make_shared<std::vector<std::int64_t>>(std::move(elems));
    return out;
}

const char* trap_name(TrapKind kind) {
    switch (kind) {
        case TrapKind::DivByZero: return "division by zero";
        case TrapKind::NullDeref: return "null dereference";
        case TrapKind::OutOfBounds: return "index out of bounds";
        case TrapKind::UndefinedCallee: return "undefined callee";
        case TrapKind::Unsupported: return "unsupported operation";
        case TrapKind::FuelExhausted: return "fuel exhausted";
    }
    return "trap";
}

std::string render_state(const State& state) {
    std::string out = "{";
    bool first = true;
    for (const auto& [name, value] : state.vars) {
        if (!first) out += ", ";
        first = false;
        out += name + " = " + render_value(value);
    }
    out += "}";
    if (!state.heap.empty()) {
        out += " heap {";
        first = true;
        for (const auto& [id, node] : state.heap) {
            if (!first) out += ", ";
            first = false;
            out += "node#" + std::to_string(id) + " = " + node.type_name + "{";
            bool fm = true;
            for (const auto& [mname, mvalue] : node.members) {
                if (!fm) out += ", ";
                fm = false;
                out += mname + " = " + render_value(mvalue);
            }
            out += "}";
        }
        out += "}";
    }
    return out;
}

// ---- input sampling ----

namespace {

struct PoolItem {
    enum class Kind { Scalar, Array, Chain, Node };
    Kind kind = Kind::Scalar;
    std::int64_t scalar = 0;
    int len = 0;  // Array / Chain
};

struct Env {
    std::map<std::string, Value> vars;
    std::map<int, HeapNode> heap;
    int next_id = 1;
};

void collect_int_literals(const c::Expr* e, std::set<std::int64_t>& out) {
    if (!e) return;
    if (e->kind == c::Expr::Kind::IntLit) out.insert(e->int_value);
    collect_int_literals(e->lhs.get(), out);
    collect_int_literals(e->rhs.get(), out);
    for (const auto& a : e->args) collect_int_literals(a.get(), out);
}

void collect_int_literals(const c::Stmt* s, std::set<std::int64_t>& out) {
    if (!s) return;
    collect_int_literals(s->init.get(), out);
    collect_int_literals(s->target.get(), out);
    collect_int_literals(s->value.get(), out);
    collect_int_literals(s->cond.get(), out);
    collect_int_literals(s->guard.get(), out);
    collect_int_literals(s->call.get(), out);
    collect_int_literals(s->ret_value.get(), out);
    collect_int_literals(s->then_branch.get(), out);
    collect_int_literals(s->else_branch.get(), out);
    collect_int_literals(s->body.get(), out);
    for (const auto& c : s->stmts) collect_int_literals(c.get(), out);
}

std::vector<std::int64_t> salient_constants(const c::Ast& ast,
                                            const c::FunctionDef& fn) {
    std::set<std::int64_t> seen;
    for (const auto& [name, value] : ast.defines) seen.insert(value);
    collect_int_literals(fn.body.get(), seen);

    std::vector<std::int64_t> all(seen.begin(), seen.end());
    std::sort(all.begin(), all.end(), [](std::int64_t a, std::int64_t b) {
        std::int64_t aa = a < 0 ? -a : a;
        std::int64_t bb = b < 0 ? -b : b;
        return aa != bb ? aa < bb : a < b;
    });
    if (all.size() > 8) all.resize(8);
    return all;
}

std::vector<PoolItem> scalar_pool(bool is_unsigned,
                                  const std::vector<std::int64_t>& constants) {
    std::vector<std::int64_t> values = {-2, -1, 0, 1, 2};
    std::set<std::int64_t> present(values.begin(), values.end());
    std::set<std::int64_t> derived;
    for (std::int64_t c : constants) {
        derived.insert(c - 1);
        derived.insert(c);
        derived.insert(c + 1);
    }
    for (std::int64_t v : derived) {
        if (present.insert(v).second) values.push_back(v);
    }
    std::vector<PoolItem> pool;
    for (std::int64_t v : values) {
        if (is_unsigned && v < 0) continue;
        PoolItem item;
        item.scalar = v;
        pool.push_back(item);
    }
    return pool;
}

std::int64_t resolve_array_size(const c::Ast& ast, const std::string& text) {
    if (text.empty()) return 8;
    char* end = nullptr;
    long long v = std::strtoll(text.c_str(), &end, 0);
    if (end && *end == '\0') return v;
    auto it = ast.defines.find(text);
    if (it != ast.defines.end()) return it->second;
    return 8;
}

bool struct_is_recursive(const ExtractionResult& ex, const std::string& name) {
    for (const auto& ds : ex.data_structures) {
        if (ds.name == name) return ds.recursive;
    }
    return false;
}

class EnvSampler {
public:
    EnvSampler(const c::Ast& ast, const ExtractionResult& ex, std::uint64_t seed)
        : ast_(ast), ex_(ex), rng_(seed) {}

    std::vector<Env> sample(const c::FunctionDef& fn, int max_envs) {
        const auto constants = salient_constants(ast_, fn);

        std::vector<std::vector<PoolItem>> pools;
        for (const auto& param : fn.params) {
            pools.push_back(pool_for(param, constants));
        }

        std::size_t count = 1;
        for (const auto& pool : pools) count = std::max(count, pool.size());
        count = std::min<std::size_t>(count, static_cast<std::size_t>(max_envs));

        std::vector<Env> envs;
        for (std::size_t i = 0; i < count; ++i) {
            Env env;
            for (std::size_t p = 0; p < pools.size(); ++p) {
                const PoolItem& item = pools[p][i % pools[p].size()];
                env.vars[fn.params[p].name] = materialize(item, fn.params[p], env);
            }
            envs.push_back(std::move(env));
        }
        return envs;
    }

private:
    std::vector<PoolItem> pool_for(const c::FunctionDef::Param& param,
                                   const std::vector<std::int64_t>& constants) {
        c::TypeRef t = ast_.resolve(param.type);
        const bool names_struct = t.is_struct || ast_.find_struct(t.base) != nullptr;

        if (names_struct && t.pointer_depth == 1 && !t.is_array) {
            if (struct_is_recursive(ex_, t.base)) {
                std::vector<PoolItem> pool;
                for (int len : {0, 1, 2, 3}) {
                    PoolItem item;
                    item.kind = PoolItem::Kind::Chain;
                    item.len = len;
                    pool.push_back(item);
                }
                return pool;
            }
            PoolItem item;
            item.kind = PoolItem::Kind::Node;
            return {item};
        }
        if (!names_struct && (t.is_array || t.pointer_depth == 1)) {
            std::vector<PoolItem> pool;
            for (int len : {0, 1, 2, 5}) {
                PoolItem item;
                item.kind = PoolItem::Kind::Array;
                item.len = len;
                pool.push_back(item);
            }
            return pool;
        }
        if (!names_struct && t.pointer_depth == 0) {
            return scalar_pool(t.is_unsigned(), constants);
        }
        // Multi-level pointers and struct arrays: a null placeholder.
        PoolItem item;
        item.kind = PoolItem::Kind::Chain;
        item.len = 0;
        return {item};
    }

    Value materialize(const PoolItem& item, const c::FunctionDef::Param& param,
                      Env& env) {
        switch (item.kind) {
            case PoolItem::Kind::Scalar:
                return Value::make_int(item.scalar);
            case PoolItem::Kind::Array: {
                std::vector<std::int64_t> elems(item.len);
                for (auto& e : elems) {
                    e = static_cast<std::int64_t>(rng_() % 7) - 3;
                }
                return Value::make_arr(std::move(elems));
            }
            case PoolItem::Kind::Node: {
                c::TypeRef t = ast_.resolve(param.type);
                return Value::make_ptr(alloc_node(t.base, env));
            }
            case PoolItem::Kind::Chain: {
                c::TypeRef t = ast_.resolve(param.type);
                return Value::make_ptr(alloc_chain(t.base, item.len, env));
            }
        }
        return Value::make_int(0);
    }

    int alloc_node(const std::string& tag, Env& env) {
        const c::CompositeDecl* decl = ast_.find_struct(tag);
        HeapNode node;
        node.type_name = tag;
        if (decl) {
            for (const auto& [mname, mtype] : decl->members) {
                c::TypeRef mt = ast_.resolve(mtype);
                if (mt.is_array) {
                    std::int64_t size = resolve_array_size(ast_, mt.array_size);
                    size = std::clamp<std::int64_t>(size, 0, kArrayMemberCap);
                    node.members[mname] =
                        Value::make_arr(std::vector<std::int64_t>(size, 0));
                } else if (mt.pointer_depth > 0) {
                    node.members[mname] = Value::make_ptr(0);
                } else {
                    node.members[mname] = Value::make_int(0);
                }
            }
        }
        int id = env.next_id++;
        env.heap[id] = std::move(node);
        return id;
    }

    // Singly linked chain ending in null, threaded through the first member
    // whose type points back to the struct itself.
    int alloc_chain(const std::string& tag, int len, Env& env) {
        if (len == 0) return 0;
        const c::CompositeDecl* decl = ast_.find_struct(tag);
        std::string link;
        if (decl) {
            for (const auto& [mname, mtype] : decl->members) {
                c::TypeRef mt = ast_.resolve(mtype);
                if (mt.base == tag && mt.pointer_depth > 0) {
                    link = mname;
                    break;
                }
            }
        }
        int next = 0;
        int head = 0;
        for (int j = len - 1; j >= 0; --j) {
            head = alloc_node(tag, env);
            HeapNode& node = env.heap[head];
            if (!link.empty()) node.members[link] = Value::make_ptr(next);
            for (auto& [mname, mvalue] : node.members) {
                if (mname != link && mvalue.kind == Value::Kind::Int) {
                    mvalue = Value::make_int(10 * (j + 1));
                }
            }
            next = head;
        }
        return head;
    }

    const c::Ast& ast_;
    const ExtractionResult& ex_;
    std::mt19937_64 rng_;
};

// ---- interpreter ----

using Frame = std::map<std::string, Value>;

class Interp {
public:
    Interp(const c::Ast& ast, const std::map<const c::Stmt*, int>& loop_numbers,
           TraceSet& out, long long& fuel)
        : ast_(ast), loop_numbers_(loop_numbers), out_(out), fuel_(fuel) {}

    void run(const c::FunctionDef& fn, Env env) {
        heap_ = std::move(env.heap);
        frames_.clear();
        frames_.push_back(std::move(env.vars));
        exec(*fn.body);
    }

private:
    enum class Flow { Normal, Broke, Continued, Returned };

    Frame& frame() { return frames_.back(); }

    State snapshot() const {
        State st;
        for (const auto& [name, value] : frames_.back()) {
            st.vars[name] = deep_copy(value);
        }
        for (const auto& [id, node] : heap_) {
            HeapNode copy;
            copy.type_name = node.type_name;
            for (const auto& [mname, mvalue] : node.members) {
                copy.members[mname] = deep_copy(mvalue);
            }
            st.heap[id] = std::move(copy);
        }
        return st;
    }

    bool truthy(const Value& v) const {
        switch (v.kind) {
            case Value::Kind::Int: return v.i != 0;
            case Value::Kind::Ptr: return v.ptr != 0;
            case Value::Kind::Arr: return true;
        }
        return false;
    }

    // ---- lvalues ----

    struct LRef {
        enum class Kind { Var, Elem, Mem } kind = Kind::Var;
        std::string name;
        std::shared_ptr<std::vector<std::int64_t>> arr;
        std::int64_t idx = 0;
        int node = 0;
        std::string member;
    };

    LRef resolve_lvalue(const c::Expr& e) {
        switch (e.kind) {
            case c::Expr::Kind::Var: {
                if (!frame().count(e.name)) {
                    throw TrapSignal{TrapKind::Unsupported,
                                     "assignment to undeclared variable " + e.name};
                }
                LRef ref;
                ref.kind = LRef::Kind::Var;
                ref.name = e.name;
                return ref;
            }
            case c::Expr::Kind::Index: {
                Value base = eval(*e.lhs);
                if (base.kind != Value::Kind::Arr) {
                    throw TrapSignal{TrapKind::Unsupported, "indexing a non-array"};
                }
                Value idx = eval(*e.rhs);
                if (idx.kind != Value::Kind::Int) {
                    throw TrapSignal{TrapKind::Unsupported, "non-integer index"};
                }
                LRef ref;
                ref.kind = LRef::Kind::Elem;
                ref.arr = base.arr;
                ref.idx = idx.i;
                return ref;
            }
            case c::Expr::Kind::Member: {
                Value base = eval(*e.lhs);
                if (base.kind != Value::Kind::Ptr) {
                    throw TrapSignal{TrapKind::Unsupported,
                                     "member access on a non-pointer"};
                }
                if (base.ptr == 0) {
                    throw TrapSignal{TrapKind::NullDeref,
                                     "null dereference at member " + e.name};
                }
                LRef ref;
                ref.kind = LRef::Kind::Mem;
                ref.node = base.ptr;
                ref.member = e.name;
                return ref;
            }
            case c::Expr::Kind::Unary: {
                if (e.unary_op == c::UnaryOp::Deref) {
                    Value base = eval(*e.lhs);
                    if (base.kind == Value::Kind::Arr) {
                        LRef ref;
                        ref.kind = LRef::Kind::Elem;
                        ref.arr = base.arr;
                        ref.idx = 0;
                        return ref;
                    }
                }
                break;
            }
            default:
                break;
        }
        throw TrapSignal{TrapKind::Unsupported, "unsupported assignment target"};
    }

    Value read(const LRef& ref) {
        switch (ref.kind) {
            case LRef::Kind::Var:
                return frame().at(ref.name);
            case LRef::Kind::Elem:
                if (ref.idx < 0 ||
                    ref.idx >= static_cast<std::int64_t>(ref.arr->size())) {
                    throw TrapSignal{TrapKind::OutOfBounds,
                                     "index " + std::to_string(ref.idx) +
                                         " outside array of length " +
                                         std::to_string(ref.arr->size())};
                }
                return Value::make_int((*ref.arr)[ref.idx]);
            case LRef::Kind::Mem: {
                auto node = heap_.find(ref.node);
                if (node == heap_.end() || !node->second.members.count(ref.member)) {
                    throw TrapSignal{TrapKind::Unsupported,
                                     "no member " + ref.member};
                }
                return node->second.members[ref.member];
            }
        }
        throw TrapSignal{TrapKind::Unsupported, "bad lvalue"};
    }

    void write(const LRef& ref, Value v) {
        switch (ref.kind) {
            case LRef::Kind::Var:
                frame()[ref.name] = std::move(v);
                return;
            case LRef::Kind::Elem:
                if (ref.idx < 0 ||
                    ref.idx >= static_cast<std::int64_t>(ref.arr->size())) {
                    throw TrapSignal{TrapKind::OutOfBounds,
                                     "index " + std::to_string(ref.idx) +
                                         " outside array of length " +
                                         std::to_string(ref.arr->size())};
                }
                if (v.kind != Value::Kind::Int) {
                    throw TrapSignal{TrapKind::Unsupported,
                                     "storing a non-integer into an array"};
                }
                (*ref.arr)[ref.idx] = v.i;
                return;
            case LRef::Kind::Mem: {
                auto node = heap_.find(ref.node);
                if (node == heap_.end() || !node->second.members.count(ref.member)) {
                    throw TrapSignal{TrapKind::Unsupported,
                                     "no member " + ref.member};
                }
                node->second.members[ref.member] = std::move(v);
                return;
            }
        }
    }

    // ---- expressions ----

    Value eval(const c::Expr& e) {
        switch (e.kind) {
            case c::Expr::Kind::IntLit:
                return Value::make_int(e.int_value);
            case c::Expr::Kind::NullLit:
                return Value::make_ptr(0);
            case c::Expr::Kind::Var: {
                auto it = frame().find(e.name);
                if (it != frame().end()) return it->second;
                auto def = ast_.defines.find(e.name);
                if (def != ast_.defines.end()) return Value::make_int(def->second);
                throw TrapSignal{TrapKind::Unsupported,
                                 "unknown variable " + e.name};
            }
            case c::Expr::Kind::Member:
            case c::Expr::Kind::Index:
                return read(resolve_lvalue(e));
            case c::Expr::Kind::Unary:
                return eval_unary(e);
            case c::Expr::Kind::Binary:
                return eval_binary(e);
            case c::Expr::Kind::Call: {
                std::vector<Value> args;
                for (const auto& a : e.args) args.push_back(eval(*a));
                return call_function(e.name, std::move(args));
            }
        }
        throw TrapSignal{TrapKind::Unsupported, "unsupported expression"};
    }

    Value eval_unary(const c::Expr& e) {
        using U = c::UnaryOp;
        switch (e.unary_op) {
            case U::Neg: {
                Value v = eval(*e.lhs);
                if (v.kind != Value::Kind::Int) {
                    throw TrapSignal{TrapKind::Unsupported, "negating a non-integer"};
                }
                return Value::make_int(-v.i);
            }
            case U::Not:
                return Value::make_int(truthy(eval(*e.lhs)) ? 0 : 1);
            case U::BitNot: {
                Value v = eval(*e.lhs);
                if (v.kind != Value::Kind::Int) {
                    throw TrapSignal{TrapKind::Unsupported, "~ on a non-integer"};
                }
                return Value::make_int(~v.i);
            }
            case U::Deref:
                return read(resolve_lvalue(e));
            case U::AddrOf:
                throw TrapSignal{TrapKind::Unsupported,
                                 "address-of is outside the modeled subset"};
            case U::PreInc:
            case U::PreDec:
            case U::PostInc:
            case U::PostDec: {
                LRef ref = resolve_lvalue(*e.lhs);
                Value old = read(ref);
                if (old.kind != Value::Kind::Int) {
                    throw TrapSignal{TrapKind::Unsupported,
                                     "++/-- on a non-integer"};
                }
                const bool inc =
                    e.unary_op == U::PreInc || e.unary_op == U::PostInc;
                Value fresh = Value::make_int(old.i + (inc ? 1 : -1));
                write(ref, fresh);
                const bool pre =
                    e.unary_op == U::PreInc || e.unary_op == U::PreDec;
                return pre ? fresh : old;
            }
        }
        throw TrapSignal{TrapKind::Unsupported, "unsupported unary operator"};
    }

    bool values_equal(const Value& a, const Value& b) {
        if (a.kind == Value::Kind::Int && b.kind == Value::Kind::Int) {
            return a.i == b.i;
        }
        if (a.kind == Value::Kind::Ptr && b.kind == Value::Kind::Ptr) {
            return a.ptr == b.ptr;
        }
        // A literal 0 compares equal to the null pointer.
        if (a.kind == Value::Kind::Int && b.kind == Value::Kind::Ptr) {
            if (a.i == 0) return b.ptr == 0;
            throw TrapSignal{TrapKind::Unsupported, "comparing pointer to integer"};
        }
        if (a.kind == Value::Kind::Ptr && b.kind == Value::Kind::Int) {
            return values_equal(b, a);
        }
        if (a.kind == Value::Kind::Arr && b.kind == Value::Kind::Arr) {
            return a.arr == b.arr;
        }
        if (a.kind == Value::Kind::Arr || b.kind == Value::Kind::Arr) {
            const Value& other = a.kind == Value::Kind::Arr ? b : a;
            if (other.kind == Value::Kind::Ptr && other.ptr == 0) return false;
            if (other.kind == Value::Kind::Int && other.i == 0) return false;
            throw TrapSignal{TrapKind::Unsupported, "comparing array to value"};
        }
        throw TrapSignal{TrapKind::Unsupported, "incomparable values"};
    }

    Value eval_binary(const c::Expr& e) {
        using B = c::BinaryOp;
        if (e.binary_op == B::And) {
            if (!truthy(eval(*e.lhs))) return Value::make_int(0);
            return Value::make_int(truthy(eval(*e.rhs)) ? 1 : 0);
        }
        if (e.binary_op == B::Or) {
            if (truthy(eval(*e.lhs))) return Value::make_int(1);
            return Value::make_int(truthy(eval(*e.rhs)) ? 1 : 0);
        }

        Value a = eval(*e.lhs);
        Value b = eval(*e.rhs);

        if (e.binary_op == B::Eq) return Value::make_int(values_equal(a, b) ? 1 : 0);
        if (e.binary_op == B::Ne) return Value::make_int(values_equal(a, b) ? 0 : 1);

        if (a.kind != Value::Kind::Int || b.kind != Value::Kind::Int) {
            throw TrapSignal{TrapKind::Unsupported,
                             "arithmetic or ordering on non-integers"};
        }
        switch (e.binary_op) {
            case B::Add: return Value::make_int(a.i + b.i);
            case B::Sub: return Value::make_int(a.i - b.i);
            case B::Mul: return Value::make_int(a.i * b.i);
            case B::Div:
                if (b.i == 0) throw TrapSignal{TrapKind::DivByZero, "division by zero"};
                return Value::make_int(a.i / b.i);
            case B::Mod:
                if (b.i == 0) throw TrapSignal{TrapKind::DivByZero, "modulo by zero"};
                return Value::make_int(a.i % b.i);
            case B::Lt: return Value::make_int(a.i < b.i ? 1 : 0);
            case B::Le: return Value::make_int(a.i <= b.i ? 1 : 0);
            case B::Gt: return Value::make_int(a.i > b.i ? 1 : 0);
            case B::Ge: return Value::make_int(a.i >= b.i ? 1 : 0);
            case B::BitAnd: return Value::make_int(a.i & b.i);
            case B::BitOr: return Value::make_int(a.i | b.i);
            case B::BitXor: return Value::make_int(a.i ^ b.i);
            case B::Shl: return Value::make_int(a.i << (b.i & 63));
            case B::Shr: return Value::make_int(a.i >> (b.i & 63));
            default:
                throw TrapSignal{TrapKind::Unsupported, "unsupported operator"};
        }
    }

    Value call_function(const std::string& name, std::vector<Value> args) {
        const c::FunctionDef* fn = ast_.find_function(name);
        if (!fn || fn->is_prototype()) {
            throw TrapSignal{TrapKind::UndefinedCallee,
                             "call to undefined function " + name};
        }
        if (args.size() != fn->params.size()) {
            throw TrapSignal{TrapKind::Unsupported,
                             "wrong argument count calling " + name};
        }
        if (--fuel_ <= 0) {
            throw TrapSignal{TrapKind::FuelExhausted, "fuel exhausted in call"};
        }
        Frame callee;
        for (std::size_t i = 0; i < args.size(); ++i) {
            callee[fn->params[i].name] = std::move(args[i]);
        }
        frames_.push_back(std::move(callee));
        Flow flow = exec(*fn->body);
        Value ret = flow == Flow::Returned ? return_value_ : Value::make_int(0);
        frames_.pop_back();
        return ret;
    }

    // ---- statements ----

    Value default_for_type(const c::TypeRef& declared) {
        c::TypeRef t = ast_.resolve(declared);
        const bool names_struct = t.is_struct || ast_.find_struct(t.base) != nullptr;
        if (t.is_array) {
            std::int64_t size = resolve_array_size(ast_, t.array_size);
            size = std::clamp<std::int64_t>(size, 0, kArrayMemberCap);
            return Value::make_arr(std::vector<std::int64_t>(size, 0));
        }
        if (t.pointer_depth > 0) return Value::make_ptr(0);
        if (names_struct) {
            // A struct local lives on the heap so member access works the
            // same way as through a pointer.
            const c::CompositeDecl* decl = ast_.find_struct(t.base);
            HeapNode node;
            node.type_name = t.base;
            if (decl) {
                for (const auto& [mname, mtype] : decl->members) {
                    node.members[mname] = default_for_type(mtype);
                }
            }
            int id = next_local_id_++;
            heap_[id] = std::move(node);
            return Value::make_ptr(id);
        }
        return Value::make_int(0);
    }

    Flow exec(const c::Stmt& s) {
        using K = c::Stmt::Kind;
        switch (s.kind) {
            case K::Decl: {
                Value v = s.init ? eval(*s.init) : default_for_type(s.decl_type);
                frame()[s.decl_name] = std::move(v);
                return Flow::Normal;
            }
            case K::Assign: {
                Value v = eval(*s.value);
                write(resolve_lvalue(*s.target), std::move(v));
                return Flow::Normal;
            }
            case K::CompoundAssign: {
                LRef ref = resolve_lvalue(*s.target);
                Value old = read(ref);
                Value rhs = eval(*s.value);
                if (old.kind != Value::Kind::Int || rhs.kind != Value::Kind::Int) {
                    throw TrapSignal{TrapKind::Unsupported,
                                     "compound assignment on non-integers"};
                }
                std::int64_t r = 0;
                switch (s.assign_op) {
                    case c::AssignOp::Add: r = old.i + rhs.i; break;
                    case c::AssignOp::Sub: r = old.i - rhs.i; break;
                    case c::AssignOp::Mul: r = old.i * rhs.i; break;
                    case c::AssignOp::Div:
                        if (rhs.i == 0) {
                            throw TrapSignal{TrapKind::DivByZero, "division by zero"};
                        }
                        r = old.i / rhs.i;
                        break;
                    case c::AssignOp::Mod:
                        if (rhs.i == 0) {
                            throw TrapSignal{TrapKind::DivByZero, "modulo by zero"};
                        }
                        r = old.i % rhs.i;
                        break;
                    case c::AssignOp::Shl: r = old.i << (rhs.i & 63); break;
                    case c::AssignOp::Shr: r = old.i >> (rhs.i & 63); break;
                    case c::AssignOp::BitAnd: r = old.i & rhs.i; break;
                    case c::AssignOp::BitOr: r = old.i | rhs.i; break;
                    case c::AssignOp::BitXor: r = old.i ^ rhs.i; break;
                    case c::AssignOp::Assign: r = rhs.i; break;
                }
                write(ref, Value::make_int(r));
                return Flow::Normal;
            }
            case K::IncrDecr: {
                LRef ref = resolve_lvalue(*s.target);
                Value old = read(ref);
                if (old.kind != Value::Kind::Int) {
                    throw TrapSignal{TrapKind::Unsupported, "++/-- on a non-integer"};
                }
                const bool inc = s.incr_op == c::UnaryOp::PreInc ||
                                 s.incr_op == c::UnaryOp::PostInc;
                write(ref, Value::make_int(old.i + (inc ? 1 : -1)));
                return Flow::Normal;
            }
            case K::If:
                if (truthy(eval(*s.cond))) return exec(*s.then_branch);
                if (s.else_branch) return exec(*s.else_branch);
                return Flow::Normal;
            case K::While:
                return exec_loop(s);
            case K::Block:
                for (const auto& child : s.stmts) {
                    Flow f = exec(*child);
                    if (f != Flow::Normal) return f;
                }
                return Flow::Normal;
            case K::Call:
                eval(*s.call);
                return Flow::Normal;
            case K::Return:
                return_value_ =
                    s.ret_value ? eval(*s.ret_value) : Value::make_int(0);
                return Flow::Returned;
            case K::Break:
                return Flow::Broke;
            case K::Continue:
                return Flow::Continued;
            case K::Empty:
                return Flow::Normal;
        }
        return Flow::Normal;
    }

    // Runs the loop body. For a desugared for loop the increment is the
    // trailing statement of the wrapper block and must still run after a
    // continue.
    Flow exec_loop_body(const c::Stmt& s) {
        if (s.loop_form == c::LoopForm::For &&
            s.body->kind == c::Stmt::Kind::Block && !s.body->stmts.empty()) {
            Flow f = exec(*s.body->stmts[0]);
            if (f == Flow::Broke || f == Flow::Returned) return f;
            for (std::size_t i = 1; i < s.body->stmts.size(); ++i) {
                Flow step = exec(*s.body->stmts[i]);
                if (step != Flow::Normal) return step;
            }
            return Flow::Normal;
        }
        Flow f = exec(*s.body);
        return f == Flow::Continued ? Flow::Normal : f;
    }

    Flow exec_loop(const c::Stmt& s) {
        LoopTrace* trace = nullptr;
        auto numbered = loop_numbers_.find(&s);
        if (numbered != loop_numbers_.end()) {
            trace = &out_.loops[numbered->second];
        }

        State prev;
        bool have_prev = false;
        bool entry_done = false;
        std::optional<std::pair<State, State>> pending;
        std::size_t recorded = 0;

        auto record_head = [&](State st) {
            if (!trace) return;
            if (!entry_done) {
                trace->entries.push_back(st);
                entry_done = true;
            }
            if (have_prev) {
                if (recorded < kPairCapPerActivation) {
                    trace->pairs.emplace_back(prev, st);
                    ++recorded;
                    pending.reset();
                } else {
                    pending = std::make_pair(prev, st);
                }
            }
            prev = std::move(st);
            have_prev = true;
        };
        auto finish = [&](std::optional<State> exit_state) {
            if (!trace) return;
            if (pending) {
                trace->pairs.push_back(std::move(*pending));
                pending.reset();
            }
            if (exit_state) trace->exits.push_back(std::move(*exit_state));
        };

        try {
            if (s.loop_form != c::LoopForm::DoWhile) {
                record_head(snapshot());
                for (;;) {
                    if (--fuel_ <= 0) {
                        throw TrapSignal{TrapKind::FuelExhausted,
                                         "fuel exhausted in loop"};
                    }
                    if (!truthy(eval(*s.guard))) {
                        finish(snapshot());
                        return Flow::Normal;
                    }
                    if (trace) ++trace->iterations;
                    Flow f = exec_loop_body(s);
                    if (f == Flow::Returned) {
                        finish(std::nullopt);
                        return f;
                    }
                    if (f == Flow::Broke) {
                        finish(std::nullopt);
                        return Flow::Normal;
                    }
                    record_head(snapshot());
                }
            }

            record_head(snapshot());
            for (;;) {
                if (--fuel_ <= 0) {
                    throw TrapSignal{TrapKind::FuelExhausted,
                                     "fuel exhausted in loop"};
                }
                if (trace) ++trace->iterations;
                Flow f = exec_loop_body(s);
                if (f == Flow::Returned) {
                    finish(std::nullopt);
                    return f;
                }
                if (f == Flow::Broke) {
                    finish(std::nullopt);
                    return Flow::Normal;
                }
                State st = snapshot();
                if (!truthy(eval(*s.guard))) {
                    record_head(st);
                    finish(std::move(st));
                    return Flow::Normal;
                }
                record_head(std::move(st));
            }
        } catch (TrapSignal&) {
            finish(std::nullopt);
            throw;
        }
    }

    const c::Ast& ast_;
    const std::map<const c::Stmt*, int>& loop_numbers_;
    TraceSet& out_;
    long long& fuel_;
    std::map<int, HeapNode> heap_;
    std::vector<Frame> frames_;
    Value return_value_;
    int next_local_id_ = 100000;  // locals stay clear of sampled node ids
};

void map_loops(const c::Stmt* s, const std::vector<LoopInfo>& loops,
               std::map<const c::Stmt*, int>& out) {
    if (!s) return;
    if (s->kind == c::Stmt::Kind::While) {
        for (const auto& info : loops) {
            if (info.span == s->span) {
                out[s] = info.number;
                break;
            }
        }
    }
    map_loops(s->then_branch.get(), loops, out);
    map_loops(s->else_branch.get(), loops, out);
    map_loops(s->body.get(), loops, out);
    for (const auto& child : s->stmts) map_loops(child.get(), loops, out);
}

}  // namespace

TraceSet collect_traces(const c::Ast& ast, const ExtractionResult& extraction,
                        const TraceOptions& options) {
    TraceSet out;
    for (const auto& loop : extraction.loops) out.loops[loop.number];

    std::map<const c::Stmt*, int> loop_numbers;
    for (const auto& fn : ast.functions) {
        map_loops(fn.body.get(), extraction.loops, loop_numbers);
    }

    std::set<std::string> loop_functions;
    for (const auto& loop : extraction.loops) loop_functions.insert(loop.function);

    long long fuel = options.fuel;
    EnvSampler sampler(ast, extraction, options.seed);
    int env_index = 0;

    for (const auto& fn : ast.functions) {
        if (fn.is_prototype()) continue;
        if (!loop_functions.count(fn.name)) continue;
        if (!options.function.empty() && fn.name != options.function) continue;

        std::vector<Env> envs = sampler.sample(fn, options.max_envs);
        for (auto& env : envs) {
            if (fuel <= 0) {
                ++out.envs_skipped;
                ++env_index;
                continue;
            }
            Interp interp(ast, loop_numbers, out, fuel);
            try {
                interp.run(fn, std::move(env));
            } catch (const TrapSignal& trap) {
                out.traps.push_back({trap.kind,
                                     fn.name + ": " + trap.message, env_index});
            }
            ++out.envs_run;
            ++env_index;
        }
    }
    out.fuel_used = options.fuel - fuel;
    return out;
}

// ---- invariant evaluation ----

namespace {

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class AcslEval {
public:
    AcslEval(const State& state, const CheckContext& ctx)
        : state_(state), ctx_(ctx) {}

    bool truth(const acsl::AcslExpr& e) { return truthy(eval(e)); }

private:
    struct Scope {
        std::map<std::string, Value> vars;
        bool opaque = false;  // predicate bodies cannot see program state
    };

    bool truthy(const Value& v) {
        switch (v.kind) {
            case Value::Kind::Int: return v.i != 0;
            case Value::Kind::Ptr: return v.ptr != 0;
            case Value::Kind::Arr: return true;
        }
        return false;
    }

    Value lookup(const std::string& name) {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            auto found = it->vars.find(name);
            if (found != it->vars.end()) return found->second;
            if (it->opaque) break;
        }
        bool barrier = false;
        for (const auto& sc : scopes_) barrier = barrier || sc.opaque;
        if (!barrier) {
            auto it = state_.vars.find(name);
            if (it != state_.vars.end()) return it->second;
        }
        if (ctx_.defines) {
            auto it = ctx_.defines->find(name);
            if (it != ctx_.defines->end()) return Value::make_int(it->second);
        }
        throw EvalError("unknown variable " + name);
    }

    std::int64_t as_int(const Value& v, const char* what) {
        if (v.kind != Value::Kind::Int) {
            throw EvalError(std::string("expected an integer for ") + what);
        }
        return v.i;
    }

    bool values_equal(const Value& a, const Value& b) {
        if (a.kind == Value::Kind::Int && b.kind == Value::Kind::Int) {
            return a.i == b.i;
        }
        if (a.kind == Value::Kind::Ptr && b.kind == Value::Kind::Ptr) {
            return a.ptr == b.ptr;
        }
        if (a.kind == Value::Kind::Int && b.kind == Value::Kind::Ptr) {
            if (a.i == 0) return b.ptr == 0;
            throw EvalError("comparing pointer to integer");
        }
        if (a.kind == Value::Kind::Ptr && b.kind == Value::Kind::Int) {
            return values_equal(b, a);
        }
        if (a.kind == Value::Kind::Arr && b.kind == Value::Kind::Arr) {
            return a.arr == b.arr;
        }
        if (a.kind == Value::Kind::Arr || b.kind == Value::Kind::Arr) {
            const Value& other = a.kind == Value::Kind::Arr ? b : a;
            if (other.kind == Value::Kind::Ptr && other.ptr == 0) return false;
            if (other.kind == Value::Kind::Int && other.i == 0) return false;
            throw EvalError("comparing array to value");
        }
        throw EvalError("incomparable values");
    }

    bool relation(acsl::RelOp op, const Value& a, const Value& b) {
        using R = acsl::RelOp;
        if (op == R::Eq) return values_equal(a, b);
        if (op == R::Ne) return !values_equal(a, b);
        std::int64_t x = as_int(a, "a comparison");
        std::int64_t y = as_int(b, "a comparison");
        switch (op) {
            case R::Lt: return x < y;
            case R::Le: return x <= y;
            case R::Gt: return x > y;
            case R::Ge: return x >= y;
            default: return false;
        }
    }

    Value eval(const acsl::AcslExpr& e) {
        using K = acsl::AcslExpr::Kind;
        switch (e.kind) {
            case K::IntLit:
                return Value::make_int(e.int_value);
            case K::BoolLit:
                return Value::make_int(e.bool_value ? 1 : 0);
            case K::NullLit:
                return Value::make_ptr(0);
            case K::Var:
                return lookup(e.name);
            case K::Member: {
                Value base = eval(*e.a);
                if (base.kind != Value::Kind::Ptr) {
                    throw EvalError("member access on a non-pointer");
                }
                if (base.ptr == 0) throw EvalError("null dereference");
                auto node = state_.heap.find(base.ptr);
                if (node == state_.heap.end()) throw EvalError("dangling pointer");
                auto member = node->second.members.find(e.name);
                if (member == node->second.members.end()) {
                    throw EvalError("no member " + e.name);
                }
                return member->second;
            }
            case K::Index: {
                Value base = eval(*e.a);
                if (base.kind != Value::Kind::Arr) {
                    throw EvalError("indexing a non-array");
                }
                std::int64_t idx = as_int(eval(*e.b), "an index");
                if (idx < 0 || idx >= static_cast<std::int64_t>(base.arr->size())) {
                    throw EvalError("index out of bounds");
                }
                return Value::make_int((*base.arr)[idx]);
            }
            case K::Deref: {
                Value base = eval(*e.a);
                if (base.kind == Value::Kind::Arr) {
                    if (base.arr->empty()) throw EvalError("dereferencing empty array");
                    return Value::make_int((*base.arr)[0]);
                }
                throw EvalError("unsupported dereference");
            }
            case K::Unary: {
                if (e.un_op == acsl::UnOp::Neg) {
                    return Value::make_int(-as_int(eval(*e.a), "negation"));
                }
                return Value::make_int(truth(*e.a) ? 0 : 1);
            }
            case K::Binary:
                return eval_binary(e);
            case K::RelChain: {
                Value left = eval(*e.operands[0]);
                for (std::size_t i = 0; i < e.rel_ops.size(); ++i) {
                    Value right = eval(*e.operands[i + 1]);
                    if (!relation(e.rel_ops[i], left, right)) {
                        return Value::make_int(0);
                    }
                    left = std::move(right);
                }
                return Value::make_int(1);
            }
            case K::Quant:
                return eval_quant(e);
            case K::Valid: {
                Value v = eval(*e.a);
                if (v.kind == Value::Kind::Ptr) {
                    return Value::make_int(
                        v.ptr != 0 && state_.heap.count(v.ptr) ? 1 : 0);
                }
                if (v.kind == Value::Kind::Arr) {
                    return Value::make_int(v.arr->empty() ? 0 : 1);
                }
                throw EvalError("\\valid applied to an integer");
            }
            case K::At: {
                if (e.name != "Here") {
                    throw EvalError("unsupported label " + e.name);
                }
                return eval(*e.a);
            }
            case K::PredApp:
                return eval_pred(e);
        }
        throw EvalError("unsupported construct");
    }

    Value eval_binary(const acsl::AcslExpr& e) {
        using B = acsl::BinOp;
        switch (e.bin_op) {
            case B::And:
                if (!truth(*e.a)) return Value::make_int(0);
                return Value::make_int(truth(*e.b) ? 1 : 0);
            case B::Or:
                if (truth(*e.a)) return Value::make_int(1);
                return Value::make_int(truth(*e.b) ? 1 : 0);
            case B::Implies:
                if (!truth(*e.a)) return Value::make_int(1);
                return Value::make_int(truth(*e.b) ? 1 : 0);
            default:
                break;
        }
        std::int64_t a = as_int(eval(*e.a), "arithmetic");
        std::int64_t b = as_int(eval(*e.b), "arithmetic");
        switch (e.bin_op) {
            case B::Add: return Value::make_int(a + b);
            case B::Sub: return Value::make_int(a - b);
            case B::Mul: return Value::make_int(a * b);
            case B::Div:
                if (b == 0) throw EvalError("division by zero");
                return Value::make_int(a / b);
            case B::Mod:
                if (b == 0) throw EvalError("modulo by zero");
                return Value::make_int(a % b);
            default:
                throw EvalError("unsupported operator");
        }
    }

    // Bounds for one quantified variable, scanned from the relation chains
    // of the constraint expression (the antecedent of a \forall implication,
    // or the body itself for \exists).
    void scan_bounds(const acsl::AcslExpr& e, const std::string& var,
                     std::optional<std::int64_t>& lo,
                     std::optional<std::int64_t>& hi) {
        using K = acsl::AcslExpr::Kind;
        if (e.kind == K::Binary && e.bin_op == acsl::BinOp::And) {
            scan_bounds(*e.a, var, lo, hi);
            scan_bounds(*e.b, var, lo, hi);
            return;
        }
        if (e.kind != K::RelChain) return;

        auto raise_lo = [&](std::int64_t v) { lo = lo ? std::max(*lo, v) : v; };
        auto lower_hi = [&](std::int64_t v) { hi = hi ? std::min(*hi, v) : v; };

        for (std::size_t i = 0; i < e.operands.size(); ++i) {
            const auto& op = *e.operands[i];
            if (op.kind != K::Var || op.name != var) continue;
            if (i > 0) {
                try {
                    std::int64_t left =
                        as_int(eval(*e.operands[i - 1]), "a bound");
                    switch (e.rel_ops[i - 1]) {
                        case acsl::RelOp::Lt: raise_lo(left + 1); break;
                        case acsl::RelOp::Le: raise_lo(left); break;
                        case acsl::RelOp::Gt: lower_hi(left - 1); break;
                        case acsl::RelOp::Ge: lower_hi(left); break;
                        case acsl::RelOp::Eq:
                            raise_lo(left);
                            lower_hi(left);
                            break;
                        default: break;
                    }
                } catch (const EvalError&) {
                }
            }
            if (i + 1 < e.operands.size()) {
                try {
                    std::int64_t right =
                        as_int(eval(*e.operands[i + 1]), "a bound");
                    switch (e.rel_ops[i]) {
                        case acsl::RelOp::Lt: lower_hi(right - 1); break;
                        case acsl::RelOp::Le: lower_hi(right); break;
                        case acsl::RelOp::Gt: raise_lo(right + 1); break;
                        case acsl::RelOp::Ge: raise_lo(right); break;
                        case acsl::RelOp::Eq:
                            raise_lo(right);
                            lower_hi(right);
                            break;
                        default: break;
                    }
                } catch (const EvalError&) {
                }
            }
        }
    }

    Value eval_quant(const acsl::AcslExpr& e) {
        for (const auto& [type, name] : e.binders) {
            if (type != "integer" && type != "int") {
                throw EvalError("non-integer quantifier binder " + name);
            }
        }
        const bool forall = e.quant == acsl::Quantifier::Forall;
        const acsl::AcslExpr* constraint = e.a.get();
        if (forall && e.a->kind == acsl::AcslExpr::Kind::Binary &&
            e.a->bin_op == acsl::BinOp::Implies) {
            constraint = e.a->a.get();
        }
        return Value::make_int(
            enumerate(e, 0, *constraint, forall) ? 1 : 0);
    }

    bool enumerate(const acsl::AcslExpr& quant, std::size_t binder_index,
                   const acsl::AcslExpr& constraint, bool forall) {
        if (binder_index == quant.binders.size()) {
            if (--quant_budget_ <= 0) {
                throw EvalError("quantifier enumeration too large");
            }
            return truth(*quant.a);
        }
        const std::string& name = quant.binders[binder_index].second;
        std::optional<std::int64_t> lo, hi;
        scan_bounds(constraint, name, lo, hi);
        if (!lo || !hi) {
            throw EvalError("cannot bound quantified variable " + name);
        }
        if (*hi - *lo + 1 > kQuantRangeCap) {
            throw EvalError("quantified range of " + name + " too large");
        }
        scopes_.push_back({});
        bool result = forall;
        for (std::int64_t v = *lo; v <= *hi; ++v) {
            scopes_.back().vars[name] = Value::make_int(v);
            bool sub;
            try {
                sub = enumerate(quant, binder_index + 1, constraint, forall);
            } catch (...) {
                scopes_.pop_back();
                throw;
            }
            if (forall && !sub) {
                result = false;
                break;
            }
            if (!forall && sub) {
                result = true;
                break;
            }
        }
        scopes_.pop_back();
        return result;
    }

    std::string value_signature(const Value& v) {
        switch (v.kind) {
            case Value::Kind::Int: return "i" + std::to_string(v.i);
            case Value::Kind::Ptr: return "p" + std::to_string(v.ptr);
            case Value::Kind::Arr:
                throw EvalError("array argument to a predicate");
        }
        return "?";
    }

    const acsl::PredicateTemplate* find_template(const std::string& name) {
        if (!ctx_.predicates) return nullptr;
        for (const auto& t : *ctx_.predicates) {
            if (t.name == name) return &t;
        }
        return nullptr;
    }

    Value eval_pred(const acsl::AcslExpr& e) {
        const acsl::PredicateTemplate* tmpl = find_template(e.name);
        if (!tmpl) throw EvalError("unknown predicate " + e.name);
        if (tmpl->params.size() != e.operands.size()) {
            throw EvalError("wrong arity for " + e.name);
        }
        std::vector<Value> args;
        for (const auto& operand : e.operands) args.push_back(eval(*operand));

        if (tmpl->kind == acsl::PredicateTemplate::Kind::Predicate) {
            Scope scope;
            scope.opaque = true;
            for (std::size_t i = 0; i < args.size(); ++i) {
                scope.vars[tmpl->params[i].second] = args[i];
            }
            scopes_.push_back(std::move(scope));
            bool result;
            try {
                result = truth(*tmpl->body);
            } catch (...) {
                scopes_.pop_back();
                throw;
            }
            scopes_.pop_back();
            return Value::make_int(result ? 1 : 0);
        }

        std::string key = e.name;
        for (const auto& arg : args) key += "," + value_signature(arg);
        auto memo = inductive_memo_.find(key);
        if (memo != inductive_memo_.end()) {
            return Value::make_int(memo->second ? 1 : 0);
        }
        // A goal already being expanded has no finite derivation this way
        // round; least fixpoint semantics makes it false.
        if (in_progress_.count(key)) return Value::make_int(0);
        if (++inductive_depth_ >
            static_cast<int>(2 * state_.heap.size() + 8)) {
            --inductive_depth_;
            throw EvalError("inductive expansion too deep");
        }
        in_progress_.insert(key);

        bool result = false;
        try {
            Scope scope;
            scope.opaque = true;
            for (std::size_t i = 0; i < args.size(); ++i) {
                scope.vars[tmpl->params[i].second] = args[i];
            }
            scopes_.push_back(std::move(scope));
            try {
                for (const auto& cs : tmpl->cases) {
                    if (truth(*cs.formula)) {
                        result = true;
                        break;
                    }
                }
            } catch (...) {
                scopes_.pop_back();
                throw;
            }
            scopes_.pop_back();
        } catch (...) {
            in_progress_.erase(key);
            --inductive_depth_;
            throw;
        }
        in_progress_.erase(key);
        --inductive_depth_;
        inductive_memo_[key] = result;
        return Value::make_int(result ? 1 : 0);
    }

    const State& state_;
    const CheckContext& ctx_;
    std::vector<Scope> scopes_;
    std::map<std::string, bool> inductive_memo_;
    std::set<std::string> in_progress_;
    long long quant_budget_ = kQuantBudget;
    int inductive_depth_ = 0;
};

bool holds(const acsl::Invariant& inv, const State& state,
           const CheckContext& ctx) {
    AcslEval eval(state, ctx);
    return eval.truth(*inv.expr);
}

}  // namespace

CheckOutcome check_invariant(const acsl::Invariant& invariant,
                             const LoopTrace& trace, const CheckContext& ctx) {
    CheckOutcome out;
    if (trace.entries.empty()) {
        out.status = CheckStatus::Inconclusive;
        out.note = "loop never reached on the sampled inputs";
        return out;
    }

    bool inconclusive = false;
    std::string note;

    for (const auto& entry : trace.entries) {
        try {
            if (!holds(invariant, entry, ctx)) {
                out.status = CheckStatus::Fail;
                out.counterexample = Counterexample{"initialization", entry};
                return out;
            }
        } catch (const EvalError& e) {
            inconclusive = true;
            if (note.empty()) note = e.what();
        }
    }

    for (const auto& [pre, post] : trace.pairs) {
        bool pre_holds;
        try {
            pre_holds = holds(invariant, pre, ctx);
        } catch (const EvalError& e) {
            inconclusive = true;
            if (note.empty()) note = e.what();
            continue;
        }
        if (!pre_holds) continue;
        try {
            if (!holds(invariant, post, ctx)) {
                out.status = CheckStatus::Fail;
                out.counterexample = Counterexample{"maintenance", pre};
                return out;
            }
        } catch (const EvalError& e) {
            inconclusive = true;
            if (note.empty()) note = e.what();
        }
    }

    if (inconclusive) {
        out.status = CheckStatus::Inconclusive;
        out.note = "evaluation failed: " + note;
        return out;
    }
    out.status = CheckStatus::Pass;
    return out;
}

}  // namespace acinv::dyn
