#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "acinv/acsl.hpp"
#include "acinv/common.hpp"
#include "acinv/prompting.hpp"

namespace acinv {

// Raised when the transport layer gives up: connection failures, non-200
// statuses after retries, or a response body that is not valid completion
// JSON.
class TransportError : public std::runtime_error {
public:
    explicit TransportError(const std::string& message)
        : std::runtime_error(message) {}
};

// Raised by the replay backend when no fixture matches the prompt hash.
class FixtureMiss : public std::runtime_error {
public:
    explicit FixtureMiss(const std::string& hash)
        : std::runtime_error("no fixture for prompt hash " + hash),
          prompt_hash(hash) {}

    std::string prompt_hash;
};

// Raised by the response parsers when a reply does not follow the format
// contract. The request wrappers catch this, retry once with a reminder,
// and fall back to a role-specific default on the second failure.
class MalformedResponse : public std::runtime_error {
public:
    explicit MalformedResponse(const std::string& message)
        : std::runtime_error(message) {}
};

enum class Role { Predicate, Invariant, Evaluate, Optimize };

const char* role_name(Role role);

// Hash that keys fixtures. Covers the role and the user prompt; the system
// prompt is excluded so fixture files survive wording tweaks to it.
std::string prompt_hash(Role role, const PromptRequest& req);

// One recorded exchange. Serialized as an element of the JSON array stored
// per program in the fixtures directory.
struct FixtureRecord {
    std::string prompt_hash;
    std::string role;
    std::string system;
    std::string prompt;
    std::string response;
};

// In-memory index over fixture files. When constructed with a directory it
// loads every *.json file inside (each one a JSON array of records) and
// writes appended records back to <dir>/<key>.json. Duplicate hashes keep
// the first record seen and emit a warning.
class FixtureStore {
public:
    FixtureStore() = default;
    explicit FixtureStore(const std::string& dir);

    const FixtureRecord* find(const std::string& hash) const;
    void record(const std::string& file_key, FixtureRecord rec);
    std::size_t size() const;

    std::vector<Diagnostic> diagnostics;

private:
    void insert(const std::string& file_key, FixtureRecord rec, bool fresh);
    void rewrite(const std::string& file_key) const;

    std::string dir_;
    std::map<std::string, FixtureRecord> by_hash_;
    std::map<std::string, std::vector<std::string>> files_;
    mutable std::mutex mu_;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string complete(Role role, const PromptRequest& req) = 0;
};

// Serves canned responses in FIFO order; used by tests and recorded runs.
class ScriptedBackend : public Backend {
public:
    void push(std::string response);
    std::string complete(Role role, const PromptRequest& req) override;

    struct Seen {
        Role role;
        std::string system;
        std::string user;
    };
    std::vector<Seen> seen;

private:
    std::vector<std::string> queue_;
    std::size_t next_ = 0;
};

class ReplayBackend : public Backend {
public:
    explicit ReplayBackend(const FixtureStore& store) : store_(store) {}
    std::string complete(Role role, const PromptRequest& req) override;

private:
    const FixtureStore& store_;
};

// Decorator that forwards to another backend and records each exchange
// under a fixed file key.
class RecordingBackend : public Backend {
public:
    RecordingBackend(Backend& inner, FixtureStore& store, std::string file_key)
        : inner_(inner), store_(store), file_key_(std::move(file_key)) {}

    std::string complete(Role role, const PromptRequest& req) override;

    void set_file_key(std::string key) { file_key_ = std::move(key); }

private:
    Backend& inner_;
    FixtureStore& store_;
    std::string file_key_;
};

// Runs fn up to `attempts` times. TransportError from fn triggers a sleep
// and a retry; the delay starts at initial_backoff and doubles. The final
// failure propagates. sleep_fn is injectable so tests can observe delays.
std::string with_retries(
    int attempts, std::chrono::milliseconds initial_backoff,
    const std::function<std::string()>& fn,
    const std::function<void(std::chrono::milliseconds)>& sleep_fn);

struct HttpConfig {
    std::string base_url = "https://api.openai.com";
    std::string path = "/v1/chat/completions";
    std::string model = "gpt-4o";
    std::string api_key_env = "ACINV_API_KEY";
    double temperature = 0.0;
    int max_attempts = 3;
    int timeout_seconds = 120;
};

class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpConfig cfg);
    std::string complete(Role role, const PromptRequest& req) override;

    // Test hook: replaces the real sleep between retries.
    std::function<void(std::chrono::milliseconds)> sleep_fn;

private:
    HttpConfig cfg_;
};

// Thin stateful wrapper that every caller goes through. Keeps an ordered
// log of completed calls so tests can assert query order and counts.
class Session {
public:
    explicit Session(Backend& backend) : backend_(backend) {}

    std::string complete(Role role, const PromptRequest& req);

    struct CallRecord {
        Role role;
        std::string prompt_hash;
    };
    const std::vector<CallRecord>& calls() const { return calls_; }

private:
    Backend& backend_;
    std::vector<CallRecord> calls_;
};

// ---- response parsing ----

// Contents of the first ```acsl fenced block (a bare ``` fence also
// counts). Throws MalformedResponse when no fence closes.
std::string extract_fenced_block(const std::string& text);

struct ParsedInvariants {
    std::vector<acsl::Invariant> invariants;
    std::vector<std::string> rejected_lines;
};

// Parses `loop invariant <expr>;` lines out of the fenced block. Lines
// that fail to parse are collected in rejected_lines; a response with no
// parseable invariant at all is malformed.
ParsedInvariants parse_invariant_response(const std::string& text);

struct ParsedTemplates {
    std::vector<acsl::PredicateTemplate> templates;
    std::vector<std::string> rejected_chunks;
};

// Splits the fenced block into predicate / inductive definitions and
// parses each one.
ParsedTemplates parse_template_response(const std::string& text);

struct Verdict {
    bool correct = false;
    std::string reason;
};

Verdict parse_verdict_response(const std::string& text);

enum class OptimizeResult { Strengthened, Weakened, Declined };

struct Optimization {
    OptimizeResult result = OptimizeResult::Declined;
    std::vector<acsl::Invariant> invariants;
    std::vector<std::string> rejected_lines;
};

Optimization parse_optimize_response(const std::string& text);

// ---- role-aware requests with the malformed-response policy ----
//
// Each wrapper sends the request, parses the reply, and on a
// MalformedResponse retries once with a format reminder appended to the
// user prompt. A second malformed reply falls back: empty result for
// generation roles, INCORRECT for evaluation, DECLINED for optimization.
// Every fallback leaves a warning in diags.

std::vector<acsl::PredicateTemplate> request_predicates(
    Session& session, const PromptRequest& req, std::vector<Diagnostic>& diags);

std::vector<acsl::Invariant> request_invariants(
    Session& session, const PromptRequest& req, std::vector<Diagnostic>& diags);

Verdict request_evaluation(
    Session& session, const PromptRequest& req, std::vector<Diagnostic>& diags);

Optimization request_optimization(
    Session& session, const PromptRequest& req, std::vector<Diagnostic>& diags);

}  // namespace acinv
