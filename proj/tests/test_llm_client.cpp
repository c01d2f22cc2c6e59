#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>
#include <thread>

#include "acinv/llm_client.hpp"

using namespace acinv;
namespace fs = std::filesystem;

namespace {

fs::path make_temp_dir(const std::string& tag) {
    std::mt19937_64 rng(std::random_device{}());
    fs::path dir = fs::temp_directory_path() /
                   (tag + "-" + std::to_string(rng() % 1000000));
    fs::create_directories(dir);
    return dir;
}

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("prompt hash covers role and user prompt") {
    PromptRequest req{"ignored system text", "write one"};
    CHECK(prompt_hash(Role::Invariant, req) == "922a952aaf2a4bfc");

    PromptRequest other{"different system text", "write one"};
    CHECK(prompt_hash(Role::Invariant, other) == prompt_hash(Role::Invariant, req));
    CHECK(prompt_hash(Role::Evaluate, req) != prompt_hash(Role::Invariant, req));

    CHECK(std::string(role_name(Role::Predicate)) == "predicate");
    CHECK(std::string(role_name(Role::Optimize)) == "optimize");
}

TEST_CASE("fenced block extraction") {
    CHECK(extract_fenced_block("```acsl\nx\ny\n```\n") == "x\ny\n");
    CHECK(extract_fenced_block("preface\n```\nbody\n```\ntrailer") == "body\n");
    CHECK_THROWS_AS(extract_fenced_block("no fence here"), MalformedResponse);
    CHECK_THROWS_AS(extract_fenced_block("```acsl\nnever closed\n"), MalformedResponse);
}

TEST_CASE("invariant response parsing") {
    SUBCASE("plain lines") {
        auto parsed = parse_invariant_response(
            "Here you go.\n```acsl\nloop invariant 0 <= i <= 30;\n"
            "loop invariant i <= n;\n```\n");
        REQUIRE(parsed.invariants.size() == 2);
        CHECK(parsed.invariants[0].text == "0 <= i <= 30");
        CHECK(parsed.invariants[1].text == "i <= n");
        CHECK(parsed.rejected_lines.empty());
    }
    SUBCASE("valid lines survive an invalid one") {
        auto parsed = parse_invariant_response(
            "```acsl\nloop invariant 0 <= i;\nloop invariant i ? 1 : 0;\n"
            "loop invariant i <= 30;\n```\n");
        REQUIRE(parsed.invariants.size() == 2);
        REQUIRE(parsed.rejected_lines.size() == 1);
        CHECK(contains(parsed.rejected_lines[0], "?"));
    }
    SUBCASE("ACSL comment dressing is tolerated") {
        auto parsed = parse_invariant_response(
            "```acsl\n/*@ loop invariant 0 <= i <= 30; */\n```\n");
        REQUIRE(parsed.invariants.size() == 1);
        CHECK(parsed.invariants[0].text == "0 <= i <= 30");
    }
    SUBCASE("a line without the keyword is rejected, not fatal") {
        auto parsed = parse_invariant_response(
            "```acsl\n0 <= i <= 30;\nloop invariant i <= n;\n```\n");
        CHECK(parsed.invariants.size() == 1);
        CHECK(parsed.rejected_lines.size() == 1);
    }
    SUBCASE("nothing parseable is malformed") {
        CHECK_THROWS_AS(parse_invariant_response("```acsl\nnonsense here\n```\n"),
                        MalformedResponse);
        CHECK_THROWS_AS(parse_invariant_response("no fence at all"), MalformedResponse);
    }
}

TEST_CASE("template response parsing") {
    SUBCASE("two predicates in one fence") {
        auto parsed = parse_template_response(
            "```acsl\n"
            "predicate positive(integer x) = x > 0;\n"
            "predicate bounded(integer x, integer n) = 0 <= x <= n;\n"
            "```\n");
        REQUIRE(parsed.templates.size() == 2);
        CHECK(parsed.templates[0].name == "positive");
        CHECK(parsed.templates[1].name == "bounded");
        CHECK(parsed.templates[1].kind == acsl::PredicateTemplate::Kind::Predicate);
    }
    SUBCASE("inductive definition spanning lines") {
        auto parsed = parse_template_response(
            "```acsl\n"
            "inductive reach(struct node *a, struct node *b) {\n"
            "  case refl: a == b;\n"
            "  case step: a != \\null && reach(a->next, b);\n"
            "}\n"
            "```\n");
        REQUIRE(parsed.templates.size() == 1);
        CHECK(parsed.templates[0].kind == acsl::PredicateTemplate::Kind::Inductive);
        CHECK(parsed.templates[0].cases.size() == 2);
    }
    SUBCASE("junk chunk is dropped with the rest kept") {
        auto parsed = parse_template_response(
            "```acsl\n"
            "predicate ok(integer x) = x >= 0;\n"
            "predicate broken(integer x) = x +;\n"
            "```\n");
        CHECK(parsed.templates.size() == 1);
        CHECK(parsed.rejected_chunks.size() == 1);
    }
    SUBCASE("no definitions is malformed") {
        CHECK_THROWS_AS(parse_template_response("```acsl\nhello world\n```\n"),
                        MalformedResponse);
    }
}

TEST_CASE("verdict parsing") {
    auto good = parse_verdict_response("VERDICT: CORRECT\n");
    CHECK(good.correct);
    CHECK(good.reason.empty());

    auto bad = parse_verdict_response(
        "VERDICT: INCORRECT\nREASON: fails on the final iteration\n");
    CHECK_FALSE(bad.correct);
    CHECK(bad.reason == "fails on the final iteration");

    CHECK_THROWS_AS(parse_verdict_response("VERDICT: MAYBE\n"), MalformedResponse);
    CHECK_THROWS_AS(parse_verdict_response("looks fine to me"), MalformedResponse);
}

TEST_CASE("optimization parsing") {
    auto strengthened = parse_optimize_response(
        "RESULT: STRENGTHENED\n```acsl\nloop invariant 0 <= i <= 30;\n"
        "loop invariant 0 <= s;\n```\n");
    CHECK(strengthened.result == OptimizeResult::Strengthened);
    CHECK(strengthened.invariants.size() == 2);

    auto weakened = parse_optimize_response(
        "RESULT: WEAKENED\n```acsl\nloop invariant 0 <= i <= n;\n```\n");
    CHECK(weakened.result == OptimizeResult::Weakened);
    REQUIRE(weakened.invariants.size() == 1);
    CHECK(weakened.invariants[0].text == "0 <= i <= n");

    auto declined = parse_optimize_response("RESULT: DECLINED\n");
    CHECK(declined.result == OptimizeResult::Declined);
    CHECK(declined.invariants.empty());

    CHECK_THROWS_AS(parse_optimize_response("RESULT: IMPROVED\n"), MalformedResponse);
    CHECK_THROWS_AS(parse_optimize_response("RESULT: STRENGTHENED\nno fence"),
                    MalformedResponse);
    CHECK_THROWS_AS(parse_optimize_response("nothing to see"), MalformedResponse);
}

TEST_CASE("scripted backend pops in order and logs requests") {
    ScriptedBackend backend;
    backend.push("first");
    backend.push("second");

    PromptRequest a{"sys", "prompt a"};
    PromptRequest b{"sys", "prompt b"};
    CHECK(backend.complete(Role::Predicate, a) == "first");
    CHECK(backend.complete(Role::Invariant, b) == "second");
    CHECK_THROWS_AS(backend.complete(Role::Invariant, b), TransportError);

    REQUIRE(backend.seen.size() == 3);
    CHECK(backend.seen[0].role == Role::Predicate);
    CHECK(backend.seen[0].user == "prompt a");
    CHECK(backend.seen[1].user == "prompt b");
}

TEST_CASE("session records call order and hashes") {
    ScriptedBackend backend;
    backend.push("r1");
    backend.push("r2");
    Session session(backend);

    PromptRequest a{"s", "alpha"};
    PromptRequest b{"s", "beta"};
    session.complete(Role::Invariant, a);
    session.complete(Role::Evaluate, b);

    REQUIRE(session.calls().size() == 2);
    CHECK(session.calls()[0].role == Role::Invariant);
    CHECK(session.calls()[0].prompt_hash == prompt_hash(Role::Invariant, a));
    CHECK(session.calls()[1].role == Role::Evaluate);
    CHECK(session.calls()[1].prompt_hash == prompt_hash(Role::Evaluate, b));
}

TEST_CASE("fixture store round trip") {
    fs::path dir = make_temp_dir("acinv-fixtures");

    {
        FixtureStore store(dir.string());
        CHECK(store.size() == 0);

        FixtureRecord rec;
        rec.prompt_hash = "aaaa";
        rec.role = "invariant";
        rec.system = "sys";
        rec.prompt = "user text";
        rec.response = "resp one";
        store.record("prog", rec);

        rec.prompt_hash = "bbbb";
        rec.response = "resp two";
        store.record("prog", rec);

        rec.prompt_hash = "aaaa";
        rec.response = "would clobber";
        store.record("prog", rec);
        CHECK(store.size() == 2);
    }

    CHECK(fs::exists(dir / "prog.json"));
    {
        std::ifstream in(dir / "prog.json");
        nlohmann::json doc;
        in >> doc;
        REQUIRE(doc.is_array());
        REQUIRE(doc.size() == 2);
        CHECK(doc[0]["prompt_hash"] == "aaaa");
        CHECK(doc[0]["response"] == "resp one");
        CHECK(doc[1]["prompt_hash"] == "bbbb");
    }

    FixtureStore reloaded(dir.string());
    CHECK(reloaded.size() == 2);
    REQUIRE(reloaded.find("aaaa") != nullptr);
    CHECK(reloaded.find("aaaa")->response == "resp one");
    CHECK(reloaded.find("cccc") == nullptr);

    fs::remove_all(dir);
}

TEST_CASE("duplicate hashes across fixture files keep the first") {
    fs::path dir = make_temp_dir("acinv-dup");
    std::ofstream(dir / "a.json")
        << R"([{"prompt_hash":"dead","role":"invariant","response":"kept"}])";
    std::ofstream(dir / "b.json")
        << R"([{"prompt_hash":"dead","role":"invariant","response":"shadowed"}])";

    FixtureStore store(dir.string());
    CHECK(store.size() == 1);
    CHECK(store.find("dead")->response == "kept");
    REQUIRE(store.diagnostics.size() == 1);
    CHECK(contains(store.diagnostics[0].message, "duplicate"));

    fs::remove_all(dir);
}

TEST_CASE("replay hits and misses") {
    fs::path dir = make_temp_dir("acinv-replay");
    PromptRequest req{"sys", "the prompt"};
    const std::string hash = prompt_hash(Role::Evaluate, req);

    std::ofstream(dir / "p.json") << nlohmann::json::array({{
        {"prompt_hash", hash},
        {"role", "evaluate"},
        {"response", "VERDICT: CORRECT"},
    }});

    FixtureStore store(dir.string());
    ReplayBackend replay(store);
    CHECK(replay.complete(Role::Evaluate, req) == "VERDICT: CORRECT");

    PromptRequest missing{"sys", "another prompt"};
    try {
        replay.complete(Role::Evaluate, missing);
        FAIL("expected FixtureMiss");
    } catch (const FixtureMiss& miss) {
        CHECK(miss.prompt_hash == prompt_hash(Role::Evaluate, missing));
        CHECK(contains(miss.what(), miss.prompt_hash));
    }

    fs::remove_all(dir);
}

TEST_CASE("record then replay is transparent") {
    fs::path dir = make_temp_dir("acinv-record");

    ScriptedBackend scripted;
    scripted.push("VERDICT: INCORRECT\nREASON: off by one\n");
    {
        FixtureStore store(dir.string());
        RecordingBackend recorder(scripted, store, "demo");
        PromptRequest req{"sys", "judge this"};
        CHECK(recorder.complete(Role::Evaluate, req) ==
              "VERDICT: INCORRECT\nREASON: off by one\n");
    }

    FixtureStore store(dir.string());
    ReplayBackend replay(store);
    PromptRequest req{"sys", "judge this"};
    CHECK(replay.complete(Role::Evaluate, req) ==
          "VERDICT: INCORRECT\nREASON: off by one\n");

    fs::remove_all(dir);
}

TEST_CASE("malformed response policy") {
    SUBCASE("retry once with a reminder, then succeed") {
        ScriptedBackend backend;
        backend.push("sorry, no fence");
        backend.push("```acsl\nloop invariant 0 <= i;\n```\n");
        Session session(backend);
        std::vector<Diagnostic> diags;

        PromptRequest req{"sys", "original prompt"};
        auto invs = request_invariants(session, req, diags);
        REQUIRE(invs.size() == 1);
        CHECK(invs[0].text == "0 <= i");
        CHECK(diags.empty());

        REQUIRE(backend.seen.size() == 2);
        CHECK(backend.seen[0].user == "original prompt");
        CHECK(contains(backend.seen[1].user, "original prompt"));
        CHECK(contains(backend.seen[1].user, "REMINDER:"));
        CHECK(session.calls().size() == 2);
    }
    SUBCASE("generation falls back to an empty set") {
        ScriptedBackend backend;
        backend.push("junk");
        backend.push("more junk");
        Session session(backend);
        std::vector<Diagnostic> diags;

        auto invs = request_invariants(session, {"s", "u"}, diags);
        CHECK(invs.empty());
        REQUIRE(diags.size() == 1);
        CHECK(diags[0].severity == Severity::Warning);
        CHECK(contains(diags[0].message, "malformed twice"));

        backend.push("still junk");
        backend.push("junk again");
        auto preds = request_predicates(session, {"s", "u2"}, diags);
        CHECK(preds.empty());
    }
    SUBCASE("evaluation falls back to incorrect") {
        ScriptedBackend backend;
        backend.push("junk");
        backend.push("more junk");
        Session session(backend);
        std::vector<Diagnostic> diags;

        auto verdict = request_evaluation(session, {"s", "u"}, diags);
        CHECK_FALSE(verdict.correct);
        CHECK(contains(verdict.reason, "malformed"));
    }
    SUBCASE("optimization falls back to declined") {
        ScriptedBackend backend;
        backend.push("junk");
        backend.push("more junk");
        Session session(backend);
        std::vector<Diagnostic> diags;

        auto opt = request_optimization(session, {"s", "u"}, diags);
        CHECK(opt.result == OptimizeResult::Declined);
        CHECK(opt.invariants.empty());
    }
    SUBCASE("dropped lines surface as notes without a retry") {
        ScriptedBackend backend;
        backend.push("```acsl\nloop invariant 0 <= i;\nloop invariant ??;\n```\n");
        Session session(backend);
        std::vector<Diagnostic> diags;

        auto invs = request_invariants(session, {"s", "u"}, diags);
        CHECK(invs.size() == 1);
        REQUIRE(diags.size() == 1);
        CHECK(diags[0].severity == Severity::Note);
        CHECK(session.calls().size() == 1);
    }
}

TEST_CASE("with_retries backs off and gives up") {
    std::vector<std::chrono::milliseconds> delays;
    auto sleeper = [&](std::chrono::milliseconds d) { delays.push_back(d); };

    SUBCASE("third attempt succeeds") {
        int attempts = 0;
        std::string out = with_retries(
            3, std::chrono::milliseconds(250),
            [&]() -> std::string {
                if (++attempts < 3) throw TransportError("boom");
                return "ok";
            },
            sleeper);
        CHECK(out == "ok");
        CHECK(attempts == 3);
        REQUIRE(delays.size() == 2);
        CHECK(delays[0] == std::chrono::milliseconds(250));
        CHECK(delays[1] == std::chrono::milliseconds(500));
    }
    SUBCASE("persistent failure propagates") {
        int attempts = 0;
        CHECK_THROWS_AS(with_retries(
                            3, std::chrono::milliseconds(1),
                            [&]() -> std::string {
                                ++attempts;
                                throw TransportError("down");
                            },
                            sleeper),
                        TransportError);
        CHECK(attempts == 3);
        CHECK(delays.size() == 2);
    }
}

TEST_CASE("http backend speaks the chat wire format and retries") {
    httplib::Server server;
    std::atomic<int> hits{0};
    std::string seen_auth;
    std::string seen_body;
    std::mutex mu;

    server.Post("/v1/chat/completions",
                [&](const httplib::Request& req, httplib::Response& res) {
                    int n = ++hits;
                    {
                        std::lock_guard<std::mutex> lock(mu);
                        seen_auth = req.get_header_value("Authorization");
                        seen_body = req.body;
                    }
                    if (n <= 2) {
                        res.status = 500;
                        res.set_content("transient", "text/plain");
                        return;
                    }
                    nlohmann::json reply = {
                        {"choices",
                         {{{"message",
                            {{"role", "assistant"}, {"content", "VERDICT: CORRECT"}}}}}},
                    };
                    res.set_content(reply.dump(), "application/json");
                });

    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread listener([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    setenv("ACINV_TEST_KEY", "sk-test-123", 1);
    HttpConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
    cfg.model = "test-model";
    cfg.api_key_env = "ACINV_TEST_KEY";
    HttpBackend backend(cfg);
    std::vector<std::chrono::milliseconds> delays;
    backend.sleep_fn = [&](std::chrono::milliseconds d) { delays.push_back(d); };

    PromptRequest req{"you judge invariants", "judge this one"};
    std::string out = backend.complete(Role::Evaluate, req);
    CHECK(out == "VERDICT: CORRECT");
    CHECK(hits.load() == 3);
    CHECK(delays.size() == 2);

    {
        std::lock_guard<std::mutex> lock(mu);
        CHECK(seen_auth == "Bearer sk-test-123");
        nlohmann::json body = nlohmann::json::parse(seen_body);
        CHECK(body["model"] == "test-model");
        CHECK(body["temperature"] == 0.0);
        REQUIRE(body["messages"].size() == 2);
        CHECK(body["messages"][0]["role"] == "system");
        CHECK(body["messages"][0]["content"] == "you judge invariants");
        CHECK(body["messages"][1]["role"] == "user");
        CHECK(body["messages"][1]["content"] == "judge this one");
    }

    SUBCASE("a missing key fails before any request") {
        unsetenv("ACINV_MISSING_KEY");
        unsetenv("OPENAI_API_KEY");
        HttpConfig nokey = cfg;
        nokey.api_key_env = "ACINV_MISSING_KEY";
        HttpBackend bare(nokey);
        int before = hits.load();
        CHECK_THROWS_AS(bare.complete(Role::Evaluate, req), TransportError);
        CHECK(hits.load() == before);
    }

    server.stop();
    listener.join();
}
