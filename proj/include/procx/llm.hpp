#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace procx {

struct ChatRequest {
    std::string model_id;
    double temperature = 0.0;
    std::string prompt_text;
    std::optional<int> max_output_tokens;

    bool operator==(const ChatRequest&) const = default;
};

struct ChatResponse {
    std::string text;
    int input_token_count = 0;
    int output_token_count = 0;
    std::string provider_name;
    bool retrieved_from_cache = false;

    bool operator==(const ChatResponse&) const = default;
};

// Hex sha256 over length-prefixed (model_id, temperature, prompt_text).
struct CacheKey {
    std::string digest;

    static CacheKey of(const ChatRequest& request);
    bool operator==(const CacheKey&) const = default;
};

nlohmann::json request_to_json(const ChatRequest& r);
ChatRequest request_from_json(const nlohmann::json& j);
nlohmann::json response_to_json(const ChatResponse& r);
ChatResponse response_from_json(const nlohmann::json& j);

class Provider {
public:
    virtual ~Provider() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
    virtual std::string name() const = 0;
};

// A rule matches when `pattern` occurs in the prompt (literal) or when the regex
// matches somewhere in it (regex rules are expected to carry their own anchors).
struct StubRule {
    std::string pattern;
    std::string response_text;
    bool is_regex = false;
};

std::unique_ptr<Provider> stub_provider(std::vector<StubRule> rules);

// JSON array of {"contains": "...", "response": "..."} or {"regex": "...", "response": "..."}.
std::vector<StubRule> load_stub_rules(const std::filesystem::path& path);
void save_stub_rules(const std::vector<StubRule>& rules, const std::filesystem::path& path);

struct HttpResult {
    int status = 0; // 0 means the request never completed
    std::string body;
    std::string error;
};

// Raw HTTP POST; injectable so tests can observe or forbid network traffic.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResult post(const std::string& base_url, const std::string& path,
                            const std::vector<std::pair<std::string, std::string>>& headers,
                            const std::string& body) = 0;
};

std::unique_ptr<Transport> make_http_transport(std::chrono::seconds timeout = std::chrono::seconds(120));

struct HttpProviderConfig {
    std::string endpoint = "https://api.openai.com";
    std::string path = "/v1/chat/completions";
    std::string credential_header = "Authorization";
    std::string credential_prefix = "Bearer ";
    std::string api_key;
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    int max_concurrency = 4;
    std::chrono::milliseconds min_interval{0};

    // PROCX_API_KEY and PROCX_ENDPOINT override the corresponding fields when set.
    void apply_environment();
};

class HttpProvider : public Provider {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    HttpProvider(HttpProviderConfig config, std::unique_ptr<Transport> transport, Sleeper sleeper = {});

    ChatResponse complete(const ChatRequest& request) override;
    std::string name() const override { return "http"; }

    static nlohmann::json request_body(const ChatRequest& request);
    static ChatResponse parse_body(const std::string& body);

private:
    HttpProviderConfig config_;
    std::unique_ptr<Transport> transport_;
    Sleeper sleeper_;
    std::mutex mutex_;
    std::condition_variable slot_free_;
    int in_flight_ = 0;
    std::chrono::steady_clock::time_point last_start_{};
};

struct CacheEntry {
    std::string digest;
    std::int64_t created_at = 0; // unix seconds
    ChatRequest request;
    ChatResponse response;
};

// One JSON file per entry, named <digest>.json. Without a directory entries live in memory.
class ResponseCache {
public:
    explicit ResponseCache(std::optional<std::filesystem::path> dir = std::nullopt);

    std::optional<CacheEntry> get(const CacheKey& key) const;
    void put(const CacheKey& key, const ChatRequest& request, const ChatResponse& response,
             std::int64_t created_at);
    std::vector<CacheEntry> list() const;
    // Removes entries created strictly before `older_than` (all entries when unset).
    std::size_t purge(std::optional<std::int64_t> older_than = std::nullopt);
    const std::optional<std::filesystem::path>& dir() const { return dir_; }

private:
    std::mutex& key_mutex(const std::string& digest) const;

    std::optional<std::filesystem::path> dir_;
    mutable std::mutex table_mutex_;
    mutable std::map<std::string, std::unique_ptr<std::mutex>> key_mutexes_;
    mutable std::map<std::string, CacheEntry> memory_;
};

enum class CacheMode { record, replay };
CacheMode cache_mode_from_string(const std::string& s);

class LlmClient {
public:
    using Clock = std::function<std::int64_t()>;

    // `provider` may be null in replay mode.
    LlmClient(std::shared_ptr<Provider> provider, std::optional<std::filesystem::path> cache_dir, CacheMode mode,
              Clock clock = {});

    ChatResponse complete(const ChatRequest& request);

    ResponseCache& cache() { return cache_; }
    CacheMode mode() const { return mode_; }
    // Latest created_at among entries served or stored by this client; 0 if none.
    std::int64_t latest_entry_time() const;

private:
    std::shared_ptr<Provider> provider_;
    ResponseCache cache_;
    CacheMode mode_;
    Clock clock_;
    mutable std::mutex time_mutex_;
    std::int64_t latest_ = 0;
};

std::int64_t unix_now();

} // namespace procx
