#include <doctest.h>

#include <atomic>
#include <deque>
#include <thread>

#include "procx/error.hpp"
#include "procx/llm.hpp"
#include "support.hpp"

using namespace procx;
using namespace procx::testing;
using nlohmann::json;

namespace {

ChatRequest request(const std::string& prompt, double temperature = 0.0) {
    ChatRequest r;
    r.model_id = "m";
    r.temperature = temperature;
    r.prompt_text = prompt;
    return r;
}

// Counts calls and answers with a canned text.
class CountingProvider : public Provider {
public:
    ChatResponse complete(const ChatRequest& r) override {
        ++calls;
        return {"echo:" + r.prompt_text, 1, 1, "counting", false};
    }
    std::string name() const override { return "counting"; }
    int calls = 0;
};

class ScriptedTransport : public Transport {
public:
    std::deque<HttpResult> script;
    std::vector<json> bodies;
    std::vector<std::vector<std::pair<std::string, std::string>>> headers;
    std::atomic<int> in_flight{0};
    std::atomic<int> max_in_flight{0};
    std::chrono::milliseconds hold{0};

    HttpResult post(const std::string&, const std::string&, const std::vector<std::pair<std::string, std::string>>& h,
                    const std::string& body) override {
        int now = ++in_flight;
        int seen = max_in_flight.load();
        while (now > seen && !max_in_flight.compare_exchange_weak(seen, now)) {
        }
        if (hold.count()) std::this_thread::sleep_for(hold);
        HttpResult r;
        {
            std::lock_guard<std::mutex> lock(m);
            bodies.push_back(json::parse(body));
            headers.push_back(h);
            if (!script.empty()) {
                r = script.front();
                script.pop_front();
            } else {
                r = ok("fine");
            }
        }
        --in_flight;
        return r;
    }

    static HttpResult ok(const std::string& content) {
        json j{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}},
               {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 3}}}};
        return {200, j.dump(), ""};
    }

    std::mutex m;
};

} // namespace

TEST_CASE("stub provider: substring, first match wins, no match is empty") {
    auto stub = stub_provider({{"Input: A claim", "actor|a claims officer", false},
                               {"Input:", "second", false},
                               {"^Task: RE", "regex hit", true}});
    CHECK(stub->complete(request("Task: MD\nInput: A claim is filed")).text == "actor|a claims officer");
    CHECK(stub->complete(request("Input: other")).text == "second");
    CHECK(stub->complete(request("Task: RE\nno input")).text == "regex hit");
    auto none = stub->complete(request("nothing to see"));
    CHECK(none.text.empty());
    CHECK(none.provider_name == "stub");
    CHECK(stub->complete(request("Input: A claim", 0)).text == stub->complete(request("Input: A claim", 0)).text);
}

TEST_CASE("stub rules file round trip") {
    TempDir tmp("rules");
    std::vector<StubRule> rules = {{"Input: x", "a|b", false}, {"^T.*", "c", true}};
    save_stub_rules(rules, tmp.path() / "r.json");
    auto back = load_stub_rules(tmp.path() / "r.json");
    REQUIRE(back.size() == 2);
    CHECK(back[0].pattern == "Input: x");
    CHECK_FALSE(back[0].is_regex);
    CHECK(back[1].is_regex);
    CHECK(back[1].response_text == "c");
    std::ofstream(tmp.path() / "bad.json") << "[{\"response\": \"x\"}]";
    CHECK_THROWS_AS(load_stub_rules(tmp.path() / "bad.json"), LoadError);
}

TEST_CASE("cache key covers model, temperature and prompt") {
    auto a = CacheKey::of(request("p"));
    CHECK(a == CacheKey::of(request("p")));
    CHECK_FALSE(a == CacheKey::of(request("p", 0.5)));
    CHECK_FALSE(a == CacheKey::of(request("q")));
    auto other = request("p");
    other.model_id = "n";
    CHECK_FALSE(a == CacheKey::of(other));
    CHECK(a.digest.size() == 64);
    // Length prefixes keep field boundaries unambiguous.
    auto x = request("bc");
    x.model_id = "a";
    auto y = request("c");
    y.model_id = "ab";
    CHECK_FALSE(CacheKey::of(x) == CacheKey::of(y));
}

TEST_CASE("record mode caches, second request comes from the cache") {
    auto provider = std::make_shared<CountingProvider>();
    LlmClient client(provider, std::nullopt, CacheMode::record, [] { return std::int64_t{100}; });
    auto first = client.complete(request("hello"));
    auto second = client.complete(request("hello"));
    CHECK_FALSE(first.retrieved_from_cache);
    CHECK(second.retrieved_from_cache);
    CHECK(first.text == second.text);
    CHECK(provider->calls == 1);
    CHECK(client.latest_entry_time() == 100);
}

TEST_CASE("replay with an empty cache is a cache miss without traffic") {
    TempDir tmp("replay");
    auto transport = std::make_unique<ScriptedTransport>();
    auto* raw = transport.get();
    auto provider = std::make_shared<HttpProvider>(HttpProviderConfig{}, std::move(transport));
    LlmClient client(provider, tmp.path(), CacheMode::replay);
    try {
        client.complete(request("x"));
        FAIL("expected cache miss");
    } catch (const LlmError& e) {
        CHECK(e.kind() == LlmError::Kind::cache_miss);
        CHECK(std::string(e.what()).find("cache miss") != std::string::npos);
    }
    CHECK(raw->bodies.empty());
    CHECK_THROWS_AS(LlmClient(nullptr, tmp.path(), CacheMode::record), std::invalid_argument);
}

TEST_CASE("on-disk cache: replay after record, list and purge") {
    TempDir tmp("disk");
    {
        auto provider = std::make_shared<CountingProvider>();
        std::int64_t t = 10;
        LlmClient client(provider, tmp.path(), CacheMode::record, [&] { return t++; });
        client.complete(request("a"));
        client.complete(request("b"));
        client.complete(request("c"));
    }
    LlmClient replay(nullptr, tmp.path(), CacheMode::replay);
    auto r = replay.complete(request("b"));
    CHECK(r.text == "echo:b");
    CHECK(r.retrieved_from_cache);
    CHECK(replay.latest_entry_time() == 11);

    ResponseCache cache(tmp.path());
    auto entries = cache.list();
    REQUIRE(entries.size() == 3);
    CHECK(std::is_sorted(entries.begin(), entries.end(),
                         [](const CacheEntry& x, const CacheEntry& y) { return x.digest < y.digest; }));
    CHECK(cache.purge(11) == 1);
    CHECK(cache.list().size() == 2);
    CHECK(cache.purge() == 2);
    CHECK(cache.list().empty());
}

TEST_CASE("corrupt cache entry is a cache I/O error") {
    TempDir tmp("corrupt");
    auto key = CacheKey::of(request("z"));
    std::ofstream(tmp.path() / (key.digest + ".json")) << "{broken";
    ResponseCache cache(tmp.path());
    try {
        cache.get(key);
        FAIL("expected error");
    } catch (const LlmError& e) {
        CHECK(e.kind() == LlmError::Kind::cache_io);
    }
}

TEST_CASE("request and response JSON round trip") {
    auto r = request("p", 0.25);
    r.max_output_tokens = 99;
    CHECK(request_from_json(request_to_json(r)) == r);
    ChatResponse resp{"t", 1, 2, "stub", false};
    CHECK(response_from_json(response_to_json(resp)) == resp);
}

TEST_CASE("HTTP provider: body, credentials and response decoding") {
    auto transport = std::make_unique<ScriptedTransport>();
    auto* raw = transport.get();
    HttpProviderConfig cfg;
    cfg.api_key = "secret";
    HttpProvider provider(cfg, std::move(transport));
    auto r = request("prompt text");
    r.max_output_tokens = 50;
    auto resp = provider.complete(r);
    CHECK(resp.text == "fine");
    CHECK(resp.input_token_count == 12);
    CHECK(resp.output_token_count == 3);
    CHECK(resp.provider_name == "http");
    REQUIRE(raw->bodies.size() == 1);
    const auto& body = raw->bodies[0];
    CHECK(body["model"] == "m");
    CHECK(body["temperature"] == 0.0);
    CHECK(body["max_tokens"] == 50);
    CHECK(body["messages"][0]["role"] == "user");
    CHECK(body["messages"][0]["content"] == "prompt text");
    CHECK_FALSE(body.contains("top_p"));
    bool has_auth = false;
    for (const auto& [k, v] : raw->headers[0]) has_auth = has_auth || (k == "Authorization" && v == "Bearer secret");
    CHECK(has_auth);
}

TEST_CASE("HTTP provider retries transient failures with doubling backoff") {
    auto transport = std::make_unique<ScriptedTransport>();
    auto* raw = transport.get();
    raw->script = {{429, "", ""}, {0, "", "connection reset"}, ScriptedTransport::ok("third time")};
    std::vector<std::chrono::milliseconds> sleeps;
    HttpProviderConfig cfg;
    cfg.initial_backoff = std::chrono::milliseconds(100);
    HttpProvider provider(cfg, std::move(transport), [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
    CHECK(provider.complete(request("x")).text == "third time");
    CHECK(sleeps == std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(100), std::chrono::milliseconds(200)});
}

TEST_CASE("HTTP provider gives up after max attempts and does not retry client errors") {
    auto transport = std::make_unique<ScriptedTransport>();
    auto* raw = transport.get();
    raw->script = {{503, "", ""}, {503, "", ""}, {503, "", ""}, ScriptedTransport::ok("late")};
    HttpProvider provider(HttpProviderConfig{}, std::move(transport), [](std::chrono::milliseconds) {});
    try {
        provider.complete(request("x"));
        FAIL("expected provider error");
    } catch (const LlmError& e) {
        CHECK(e.kind() == LlmError::Kind::provider);
    }
    CHECK(raw->bodies.size() == 3);

    auto t2 = std::make_unique<ScriptedTransport>();
    auto* raw2 = t2.get();
    raw2->script = {{401, "{\"error\":\"bad key\"}", ""}};
    HttpProvider p2(HttpProviderConfig{}, std::move(t2), [](std::chrono::milliseconds) {});
    CHECK_THROWS_AS(p2.complete(request("x")), LlmError);
    CHECK(raw2->bodies.size() == 1);
}

TEST_CASE("malformed provider payload") {
    try {
        HttpProvider::parse_body("{\"choices\": []}");
        FAIL("expected error");
    } catch (const LlmError& e) {
        CHECK(e.kind() == LlmError::Kind::malformed_payload);
    }
    CHECK_THROWS_AS(HttpProvider::parse_body("not json"), LlmError);
}

TEST_CASE("HTTP provider caps concurrent requests") {
    auto transport = std::make_unique<ScriptedTransport>();
    auto* raw = transport.get();
    raw->hold = std::chrono::milliseconds(20);
    HttpProviderConfig cfg;
    cfg.max_concurrency = 2;
    HttpProvider provider(cfg, std::move(transport));
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) threads.emplace_back([&, i] { provider.complete(request(std::to_string(i))); });
    for (auto& t : threads) t.join();
    CHECK(raw->bodies.size() == 8);
    CHECK(raw->max_in_flight.load() <= 2);
}

TEST_CASE("cache modes parse") {
    CHECK(cache_mode_from_string("record") == CacheMode::record);
    CHECK(cache_mode_from_string("replay") == CacheMode::replay);
    CHECK_THROWS_AS(cache_mode_from_string("live"), UsageError);
}
