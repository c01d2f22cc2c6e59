#include "acinv/llm_client.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

namespace acinv {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

const char* role_name(Role role) {
    switch (role) {
        case Role::Predicate: return "predicate";
        case Role::Invariant: return "invariant";
        case Role::Evaluate: return "evaluate";
        case Role::Optimize: return "optimize";
    }
    return "unknown";
}

std::string prompt_hash(Role role, const PromptRequest& req) {
    return stable_hash_hex(std::string(role_name(role)) + "\n" + req.user);
}

// ---- FixtureStore ----

FixtureStore::FixtureStore(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);

    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(dir_, ec)) {
        if (entry.path().extension() == ".json") paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());

    for (const auto& path : paths) {
        std::ifstream in(path);
        json doc;
        try {
            in >> doc;
        } catch (const json::exception& e) {
            diagnostics.push_back({Severity::Warning, std::nullopt,
                                   "skipping fixture file " + path.filename().string() +
                                       ": " + e.what()});
            continue;
        }
        if (!doc.is_array()) {
            diagnostics.push_back({Severity::Warning, std::nullopt,
                                   "skipping fixture file " + path.filename().string() +
                                       ": expected a JSON array"});
            continue;
        }
        const std::string key = path.stem().string();
        for (const auto& item : doc) {
            FixtureRecord rec;
            rec.prompt_hash = item.value("prompt_hash", "");
            rec.role = item.value("role", "");
            rec.system = item.value("system", "");
            rec.prompt = item.value("prompt", "");
            rec.response = item.value("response", "");
            if (rec.prompt_hash.empty()) {
                diagnostics.push_back({Severity::Warning, std::nullopt,
                                       "fixture without prompt_hash in " +
                                           path.filename().string()});
                continue;
            }
            insert(key, std::move(rec), false);
        }
    }
}

const FixtureRecord* FixtureStore::find(const std::string& hash) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = by_hash_.find(hash);
    return it == by_hash_.end() ? nullptr : &it->second;
}

void FixtureStore::record(const std::string& file_key, FixtureRecord rec) {
    std::lock_guard<std::mutex> lock(mu_);
    if (by_hash_.count(rec.prompt_hash)) return;
    insert(file_key, std::move(rec), true);
    if (!dir_.empty()) rewrite(file_key);
}

std::size_t FixtureStore::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return by_hash_.size();
}

void FixtureStore::insert(const std::string& file_key, FixtureRecord rec, bool fresh) {
    auto [it, inserted] = by_hash_.emplace(rec.prompt_hash, std::move(rec));
    if (!inserted) {
        if (!fresh) {
            diagnostics.push_back({Severity::Warning, std::nullopt,
                                   "duplicate fixture for hash " + it->first +
                                       "; keeping the first"});
        }
        return;
    }
    files_[file_key].push_back(it->first);
}

void FixtureStore::rewrite(const std::string& file_key) const {
    ordered_json arr = ordered_json::array();
    auto it = files_.find(file_key);
    if (it != files_.end()) {
        for (const auto& hash : it->second) {
            const FixtureRecord& rec = by_hash_.at(hash);
            arr.push_back(ordered_json{{"prompt_hash", rec.prompt_hash},
                                       {"role", rec.role},
                                       {"system", rec.system},
                                       {"prompt", rec.prompt},
                                       {"response", rec.response}});
        }
    }
    std::ofstream out(fs::path(dir_) / (file_key + ".json"));
    out << arr.dump(2) << "\n";
}

// ---- backends ----

void ScriptedBackend::push(std::string response) {
    queue_.push_back(std::move(response));
}

std::string ScriptedBackend::complete(Role role, const PromptRequest& req) {
    seen.push_back({role, req.system, req.user});
    if (next_ >= queue_.size()) {
        throw TransportError("scripted backend exhausted after " +
                             std::to_string(queue_.size()) + " responses");
    }
    return queue_[next_++];
}

std::string ReplayBackend::complete(Role role, const PromptRequest& req) {
    const std::string hash = prompt_hash(role, req);
    const FixtureRecord* rec = store_.find(hash);
    if (!rec) throw FixtureMiss(hash);
    return rec->response;
}

std::string RecordingBackend::complete(Role role, const PromptRequest& req) {
    std::string response = inner_.complete(role, req);
    FixtureRecord rec;
    rec.prompt_hash = prompt_hash(role, req);
    rec.role = role_name(role);
    rec.system = req.system;
    rec.prompt = req.user;
    rec.response = response;
    store_.record(file_key_, std::move(rec));
    return response;
}

// ---- retries and HTTP ----

std::string with_retries(
    int attempts, std::chrono::milliseconds initial_backoff,
    const std::function<std::string()>& fn,
    const std::function<void(std::chrono::milliseconds)>& sleep_fn) {
    std::chrono::milliseconds delay = initial_backoff;
    for (int attempt = 1;; ++attempt) {
        try {
            return fn();
        } catch (const TransportError&) {
            if (attempt >= attempts) throw;
            sleep_fn(delay);
            delay *= 2;
        }
    }
}

HttpBackend::HttpBackend(HttpConfig cfg) : cfg_(std::move(cfg)) {}

std::string HttpBackend::complete(Role, const PromptRequest& req) {
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    if (!key || !*key) key = std::getenv("OPENAI_API_KEY");
    if (!key || !*key) {
        throw TransportError("no API key: set " + cfg_.api_key_env +
                             " (or OPENAI_API_KEY) for the live backend");
    }

    ordered_json body{
        {"model", cfg_.model},
        {"temperature", cfg_.temperature},
        {"messages",
         ordered_json::array({ordered_json{{"role", "system"}, {"content", req.system}},
                              ordered_json{{"role", "user"}, {"content", req.user}}})},
    };
    const std::string payload = body.dump();

    httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};

    auto attempt = [&]() -> std::string {
        httplib::Client client(cfg_.base_url);
        client.set_connection_timeout(cfg_.timeout_seconds, 0);
        client.set_read_timeout(cfg_.timeout_seconds, 0);
        client.set_write_timeout(cfg_.timeout_seconds, 0);

        auto res = client.Post(cfg_.path, headers, payload, "application/json");
        if (!res) {
            throw TransportError("request failed: " + httplib::to_string(res.error()));
        }
        if (res->status != 200) {
            std::string detail = res->body.substr(0, 200);
            throw TransportError("HTTP " + std::to_string(res->status) +
                                 (detail.empty() ? "" : ": " + detail));
        }
        try {
            json doc = json::parse(res->body);
            return doc.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw TransportError(std::string("unexpected completion body: ") + e.what());
        }
    };

    auto sleeper = sleep_fn ? sleep_fn : [](std::chrono::milliseconds d) {
        std::this_thread::sleep_for(d);
    };
    return with_retries(cfg_.max_attempts, std::chrono::milliseconds(250), attempt,
                        sleeper);
}

std::string Session::complete(Role role, const PromptRequest& req) {
    std::string response = backend_.complete(role, req);
    calls_.push_back({role, prompt_hash(role, req)});
    return response;
}

// ---- response parsing ----

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

// Strips ACSL comment dressing a model may copy from the examples: a
// leading "/*@" or "@", and a trailing "*/".
std::string strip_acsl_dressing(std::string line) {
    std::string t = trim(line);
    if (t.rfind("/*@", 0) == 0) t = trim(t.substr(3));
    else if (t.rfind("/*", 0) == 0) t = trim(t.substr(2));
    else if (!t.empty() && t[0] == '@') t = trim(t.substr(1));
    if (t.size() >= 2 && t.compare(t.size() - 2, 2, "*/") == 0) {
        t = trim(t.substr(0, t.size() - 2));
    }
    return t;
}

std::string first_word(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_first_of(" \t\r.,!", b);
    return s.substr(b, e == std::string::npos ? std::string::npos : e - b);
}

}  // namespace

std::string extract_fenced_block(const std::string& text) {
    const auto lines = split_lines(text);
    std::size_t open = lines.size();
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).rfind("```", 0) == 0) {
            open = i;
            break;
        }
    }
    if (open == lines.size()) throw MalformedResponse("no fenced block in response");
    std::string block;
    for (std::size_t i = open + 1; i < lines.size(); ++i) {
        if (trim(lines[i]).rfind("```", 0) == 0) return block;
        block += lines[i];
        block += '\n';
    }
    throw MalformedResponse("unterminated code fence");
}

ParsedInvariants parse_invariant_response(const std::string& text) {
    ParsedInvariants out;
    const std::string block = extract_fenced_block(text);
    for (const auto& raw : split_lines(block)) {
        std::string line = strip_acsl_dressing(raw);
        if (line.empty()) continue;
        if (line.rfind("loop invariant", 0) != 0) {
            out.rejected_lines.push_back(trim(raw));
            continue;
        }
        std::string body = trim(line.substr(std::string("loop invariant").size()));
        if (!body.empty() && body.back() == ';') body = trim(body.substr(0, body.size() - 1));
        try {
            out.invariants.push_back(acsl::Invariant::from(acsl::parse_acsl_expr(body)));
        } catch (const AcslSyntaxError&) {
            out.rejected_lines.push_back(trim(raw));
        }
    }
    if (out.invariants.empty()) {
        throw MalformedResponse("no loop invariant lines found in fenced block");
    }
    return out;
}

ParsedTemplates parse_template_response(const std::string& text) {
    ParsedTemplates out;
    const std::string block = extract_fenced_block(text);

    std::vector<std::string> chunks;
    std::string cur;
    for (const auto& raw : split_lines(block)) {
        std::string line = strip_acsl_dressing(raw);
        if (line.empty()) continue;
        const bool starts_def =
            line.rfind("predicate ", 0) == 0 || line.rfind("inductive ", 0) == 0;
        if (starts_def && !trim(cur).empty()) {
            chunks.push_back(cur);
            cur.clear();
        }
        cur += line;
        cur += '\n';
    }
    if (!trim(cur).empty()) chunks.push_back(cur);

    for (const auto& chunk : chunks) {
        try {
            out.templates.push_back(acsl::parse_predicate_template(chunk));
        } catch (const AcslSyntaxError&) {
            out.rejected_chunks.push_back(trim(chunk));
        }
    }
    if (out.templates.empty()) {
        throw MalformedResponse("no predicate or inductive definition found");
    }
    return out;
}

Verdict parse_verdict_response(const std::string& text) {
    Verdict verdict;
    bool found = false;
    for (const auto& line : split_lines(text)) {
        std::size_t pos = line.find("VERDICT:");
        if (pos != std::string::npos && !found) {
            std::string word = first_word(line.substr(pos + 8));
            if (word == "CORRECT") {
                verdict.correct = true;
            } else if (word == "INCORRECT") {
                verdict.correct = false;
            } else {
                throw MalformedResponse("unrecognized verdict: " + word);
            }
            found = true;
        }
        pos = line.find("REASON:");
        if (pos != std::string::npos && verdict.reason.empty()) {
            verdict.reason = trim(line.substr(pos + 7));
        }
    }
    if (!found) throw MalformedResponse("no VERDICT line in response");
    return verdict;
}

Optimization parse_optimize_response(const std::string& text) {
    Optimization out;
    bool found = false;
    for (const auto& line : split_lines(text)) {
        std::size_t pos = line.find("RESULT:");
        if (pos == std::string::npos) continue;
        std::string word = first_word(line.substr(pos + 7));
        if (word == "STRENGTHENED") out.result = OptimizeResult::Strengthened;
        else if (word == "WEAKENED") out.result = OptimizeResult::Weakened;
        else if (word == "DECLINED") out.result = OptimizeResult::Declined;
        else throw MalformedResponse("unrecognized RESULT: " + word);
        found = true;
        break;
    }
    if (!found) throw MalformedResponse("no RESULT line in response");
    if (out.result == OptimizeResult::Declined) return out;

    ParsedInvariants parsed = parse_invariant_response(text);
    out.invariants = std::move(parsed.invariants);
    out.rejected_lines = std::move(parsed.rejected_lines);
    return out;
}

// ---- request wrappers ----

namespace {

constexpr const char* kPredicateReminder =
    "REMINDER: your previous reply was not in the required format. Reply with a "
    "single fenced ```acsl block containing only predicate or inductive "
    "definitions.";

constexpr const char* kInvariantReminder =
    "REMINDER: your previous reply was not in the required format. Reply with a "
    "single fenced ```acsl block containing one `loop invariant <expr>;` line "
    "per invariant.";

constexpr const char* kEvaluateReminder =
    "REMINDER: your previous reply was not in the required format. Reply with "
    "`VERDICT: CORRECT`, or `VERDICT: INCORRECT` followed by a `REASON:` line.";

constexpr const char* kOptimizeReminder =
    "REMINDER: your previous reply was not in the required format. Reply with "
    "`RESULT: STRENGTHENED`, `RESULT: WEAKENED`, or `RESULT: DECLINED`, and "
    "include a fenced ```acsl block with the revised `loop invariant <expr>;` "
    "lines unless you decline.";

template <typename T>
T request_with_policy(Session& session, const PromptRequest& req, Role role,
                      const char* reminder,
                      const std::function<T(const std::string&)>& parse,
                      const std::function<T()>& fallback,
                      std::vector<Diagnostic>& diags) {
    try {
        return parse(session.complete(role, req));
    } catch (const MalformedResponse&) {
    }
    PromptRequest retry = req;
    retry.user += "\n\n";
    retry.user += reminder;
    try {
        return parse(session.complete(role, retry));
    } catch (const MalformedResponse& second) {
        diags.push_back({Severity::Warning, std::nullopt,
                         std::string(role_name(role)) + " response malformed twice (" +
                             second.what() + "); using the fallback"});
        return fallback();
    }
}

}  // namespace

std::vector<acsl::PredicateTemplate> request_predicates(
    Session& session, const PromptRequest& req, std::vector<Diagnostic>& diags) {
    return request_with_policy<std::vector<acsl::PredicateTemplate>>(
        session, req, Role::Predicate, kPredicateReminder,
        [&diags](const std::string& text) {
            ParsedTemplates parsed = parse_template_response(text);
            for (const auto& chunk : parsed.rejected_chunks) {
                diags.push_back({Severity::Note, std::nullopt,
                                 "dropped unparseable definition: " + chunk});
            }
            return parsed.templates;
        },
        [] { return std::vector<acsl::PredicateTemplate>{}; }, diags);
}

std::vector<acsl::Invariant> request_invariants(
    Session& session, const PromptRequest& req, std::vector<Diagnostic>& diags) {
    return request_with_policy<std::vector<acsl::Invariant>>(
        session, req, Role::Invariant, kInvariantReminder,
        [&diags](const std::string& text) {
            ParsedInvariants parsed = parse_invariant_response(text);
            for (const auto& line : parsed.rejected_lines) {
                diags.push_back({Severity::Note, std::nullopt,
                                 "dropped unparseable invariant line: " + line});
            }
            return parsed.invariants;
        },
        [] { return std::vector<acsl::Invariant>{}; }, diags);
}

Verdict request_evaluation(Session& session, const PromptRequest& req,
                           std::vector<Diagnostic>& diags) {
    return request_with_policy<Verdict>(
        session, req, Role::Evaluate, kEvaluateReminder,
        [](const std::string& text) { return parse_verdict_response(text); },
        [] {
            Verdict v;
            v.correct = false;
            v.reason = "response was malformed; treating the invariants as incorrect";
            return v;
        },
        diags);
}

Optimization request_optimization(Session& session, const PromptRequest& req,
                                  std::vector<Diagnostic>& diags) {
    return request_with_policy<Optimization>(
        session, req, Role::Optimize, kOptimizeReminder,
        [](const std::string& text) { return parse_optimize_response(text); },
        [] { return Optimization{}; }, diags);
}

}  // namespace acinv
