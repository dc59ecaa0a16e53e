#include "procx/llm.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "procx/error.hpp"
#include "procx/text.hpp"

namespace procx {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string length_prefixed(std::string_view s) { return std::to_string(s.size()) + ":" + std::string(s); }

std::string format_temperature(double t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", t);
    return buf;
}

int word_count(std::string_view s) { return static_cast<int>(text::count_words(s)); }

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw LlmError(LlmError::Kind::cache_io, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class StubProvider : public Provider {
public:
    explicit StubProvider(std::vector<StubRule> rules) : rules_(std::move(rules)) {
        for (const auto& r : rules_) {
            if (r.is_regex) {
                regexes_.emplace_back(r.pattern, std::regex::ECMAScript);
            } else {
                regexes_.emplace_back();
            }
        }
    }

    ChatResponse complete(const ChatRequest& request) override {
        ChatResponse out;
        out.provider_name = name();
        out.input_token_count = word_count(request.prompt_text);
        for (std::size_t i = 0; i < rules_.size(); ++i) {
            const auto& r = rules_[i];
            bool hit = r.is_regex ? std::regex_search(request.prompt_text, regexes_[i])
                                  : request.prompt_text.find(r.pattern) != std::string::npos;
            if (hit) {
                out.text = r.response_text;
                break;
            }
        }
        out.output_token_count = word_count(out.text);
        return out;
    }

    std::string name() const override { return "stub"; }

private:
    std::vector<StubRule> rules_;
    std::vector<std::regex> regexes_;
};

bool transient(int status) { return status == 0 || status == 429 || status >= 500; }

} // namespace

CacheKey CacheKey::of(const ChatRequest& r) {
    return {text::sha256_hex(length_prefixed(r.model_id) + length_prefixed(format_temperature(r.temperature)) +
                             length_prefixed(r.prompt_text))};
}

json request_to_json(const ChatRequest& r) {
    json j{{"model_id", r.model_id}, {"temperature", r.temperature}, {"prompt_text", r.prompt_text}};
    j["max_output_tokens"] = r.max_output_tokens ? json(*r.max_output_tokens) : json(nullptr);
    return j;
}

ChatRequest request_from_json(const json& j) {
    ChatRequest r;
    r.model_id = j.at("model_id").get<std::string>();
    r.temperature = j.at("temperature").get<double>();
    r.prompt_text = j.at("prompt_text").get<std::string>();
    if (j.contains("max_output_tokens") && !j["max_output_tokens"].is_null()) {
        r.max_output_tokens = j["max_output_tokens"].get<int>();
    }
    return r;
}

json response_to_json(const ChatResponse& r) {
    return {{"text", r.text},
            {"input_token_count", r.input_token_count},
            {"output_token_count", r.output_token_count},
            {"provider_name", r.provider_name}};
}

ChatResponse response_from_json(const json& j) {
    ChatResponse r;
    r.text = j.at("text").get<std::string>();
    r.input_token_count = j.value("input_token_count", 0);
    r.output_token_count = j.value("output_token_count", 0);
    r.provider_name = j.value("provider_name", "");
    return r;
}

std::unique_ptr<Provider> stub_provider(std::vector<StubRule> rules) {
    return std::make_unique<StubProvider>(std::move(rules));
}

std::vector<StubRule> load_stub_rules(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open stub rules " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw LoadError(path.string(), 1, e.what());
    }
    if (!j.is_array()) throw LoadError(path.string(), 1, "stub rules must be a JSON array");
    std::vector<StubRule> rules;
    for (const auto& e : j) {
        if (!e.is_object() || !(e.contains("regex") || e.contains("contains")) || !e.contains("response")) {
            throw LoadError(path.string(), 1, "stub rule needs 'contains' or 'regex' and 'response'");
        }
        StubRule r;
        if (e.contains("regex")) {
            r.pattern = e["regex"].get<std::string>();
            r.is_regex = true;
        } else {
            r.pattern = e.at("contains").get<std::string>();
        }
        r.response_text = e.at("response").get<std::string>();
        rules.push_back(std::move(r));
    }
    return rules;
}

void save_stub_rules(const std::vector<StubRule>& rules, const fs::path& path) {
    json j = json::array();
    for (const auto& r : rules) {
        j.push_back({{r.is_regex ? "regex" : "contains", r.pattern}, {"response", r.response_text}});
    }
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << "\n";
}

void HttpProviderConfig::apply_environment() {
    if (const char* key = std::getenv("PROCX_API_KEY"); key && *key) api_key = key;
    if (const char* ep = std::getenv("PROCX_ENDPOINT"); ep && *ep) endpoint = ep;
}

HttpProvider::HttpProvider(HttpProviderConfig config, std::unique_ptr<Transport> transport, Sleeper sleeper)
    : config_(std::move(config)), transport_(std::move(transport)), sleeper_(std::move(sleeper)) {
    if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    if (config_.max_concurrency < 1) config_.max_concurrency = 1;
    if (config_.max_attempts < 1) config_.max_attempts = 1;
}

json HttpProvider::request_body(const ChatRequest& request) {
    // top_p is left to the provider default.
    json body{{"model", request.model_id},
              {"temperature", request.temperature},
              {"messages", json::array({{{"role", "user"}, {"content", request.prompt_text}}})}};
    if (request.max_output_tokens) body["max_tokens"] = *request.max_output_tokens;
    return body;
}

ChatResponse HttpProvider::parse_body(const std::string& body) {
    try {
        auto j = json::parse(body);
        ChatResponse r;
        r.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        if (j.contains("usage")) {
            r.input_token_count = j["usage"].value("prompt_tokens", 0);
            r.output_token_count = j["usage"].value("completion_tokens", 0);
        }
        return r;
    } catch (const json::exception& e) {
        throw LlmError(LlmError::Kind::malformed_payload, std::string("malformed provider payload: ") + e.what());
    }
}

ChatResponse HttpProvider::complete(const ChatRequest& request) {
    {
        std::unique_lock lock(mutex_);
        slot_free_.wait(lock, [&] { return in_flight_ < config_.max_concurrency; });
        ++in_flight_;
        auto now = std::chrono::steady_clock::now();
        auto earliest = last_start_ + config_.min_interval;
        if (config_.min_interval.count() > 0 && now < earliest) {
            auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(earliest - now);
            last_start_ = earliest;
            lock.unlock();
            sleeper_(wait);
        } else {
            last_start_ = now;
        }
    }
    struct Release {
        HttpProvider* self;
        ~Release() {
            std::lock_guard lock(self->mutex_);
            --self->in_flight_;
            self->slot_free_.notify_one();
        }
    } release{this};

    std::vector<std::pair<std::string, std::string>> headers{{"Content-Type", "application/json"}};
    if (!config_.api_key.empty()) headers.emplace_back(config_.credential_header, config_.credential_prefix + config_.api_key);
    const auto body = request_body(request).dump();

    auto backoff = config_.initial_backoff;
    HttpResult last;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        last = transport_->post(config_.endpoint, config_.path, headers, body);
        if (last.status >= 200 && last.status < 300) {
            auto r = parse_body(last.body);
            r.provider_name = name();
            return r;
        }
        if (!transient(last.status)) break;
        if (attempt < config_.max_attempts) {
            sleeper_(backoff);
            backoff *= 2;
        }
    }
    std::string detail = last.status == 0 ? last.error : "HTTP " + std::to_string(last.status);
    throw LlmError(LlmError::Kind::provider, "provider request failed: " + detail);
}

ResponseCache::ResponseCache(std::optional<fs::path> dir) : dir_(std::move(dir)) {
    if (dir_) {
        std::error_code ec;
        fs::create_directories(*dir_, ec);
        if (ec) throw LlmError(LlmError::Kind::cache_io, "cannot create cache directory " + dir_->string());
    }
}

std::mutex& ResponseCache::key_mutex(const std::string& digest) const {
    std::lock_guard lock(table_mutex_);
    auto& slot = key_mutexes_[digest];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

namespace {

CacheEntry entry_from_json(const json& j) {
    CacheEntry e;
    e.digest = j.at("digest").get<std::string>();
    e.created_at = j.at("created_at").get<std::int64_t>();
    e.request = request_from_json(j.at("request"));
    e.response = response_from_json(j.at("response"));
    return e;
}

json entry_to_json(const CacheEntry& e) {
    return {{"digest", e.digest},
            {"created_at", e.created_at},
            {"request", request_to_json(e.request)},
            {"response", response_to_json(e.response)}};
}

CacheEntry read_entry(const fs::path& p) {
    try {
        return entry_from_json(json::parse(read_file(p)));
    } catch (const json::exception& e) {
        throw LlmError(LlmError::Kind::cache_io, "corrupt cache entry " + p.string() + ": " + e.what());
    }
}

} // namespace

std::optional<CacheEntry> ResponseCache::get(const CacheKey& key) const {
    std::lock_guard lock(key_mutex(key.digest));
    if (!dir_) {
        std::lock_guard table(table_mutex_);
        auto it = memory_.find(key.digest);
        if (it == memory_.end()) return std::nullopt;
        return it->second;
    }
    auto p = *dir_ / (key.digest + ".json");
    if (!fs::exists(p)) return std::nullopt;
    return read_entry(p);
}

void ResponseCache::put(const CacheKey& key, const ChatRequest& request, const ChatResponse& response,
                        std::int64_t created_at) {
    CacheEntry e{key.digest, created_at, request, response};
    e.response.retrieved_from_cache = false;
    std::lock_guard lock(key_mutex(key.digest));
    if (!dir_) {
        std::lock_guard table(table_mutex_);
        memory_[key.digest] = std::move(e);
        return;
    }
    auto final_path = *dir_ / (key.digest + ".json");
    auto tmp = *dir_ / (key.digest + ".json.tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw LlmError(LlmError::Kind::cache_io, "cannot write " + tmp.string());
        out << entry_to_json(e).dump(2) << "\n";
        if (!out) throw LlmError(LlmError::Kind::cache_io, "cannot write " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, final_path, ec);
    if (ec) throw LlmError(LlmError::Kind::cache_io, "cannot rename into " + final_path.string());
}

std::vector<CacheEntry> ResponseCache::list() const {
    std::vector<CacheEntry> out;
    if (!dir_) {
        std::lock_guard table(table_mutex_);
        for (const auto& [_, e] : memory_) out.push_back(e);
        return out;
    }
    std::vector<fs::path> files;
    for (const auto& de : fs::directory_iterator(*dir_)) {
        if (de.is_regular_file() && de.path().extension() == ".json") files.push_back(de.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.push_back(read_entry(f));
    return out;
}

std::size_t ResponseCache::purge(std::optional<std::int64_t> older_than) {
    std::size_t removed = 0;
    if (!dir_) {
        std::lock_guard table(table_mutex_);
        for (auto it = memory_.begin(); it != memory_.end();) {
            if (!older_than || it->second.created_at < *older_than) {
                it = memory_.erase(it);
                ++removed;
            } else {
                ++it;
            }
        }
        return removed;
    }
    for (const auto& e : list()) {
        if (older_than && e.created_at >= *older_than) continue;
        std::error_code ec;
        if (!fs::remove(*dir_ / (e.digest + ".json"), ec) || ec) {
            throw LlmError(LlmError::Kind::cache_io, "cannot remove cache entry " + e.digest);
        }
        ++removed;
    }
    return removed;
}

CacheMode cache_mode_from_string(const std::string& s) {
    auto m = text::to_lower(s);
    if (m == "record") return CacheMode::record;
    if (m == "replay") return CacheMode::replay;
    throw UsageError("unknown cache mode '" + s + "' (expected record or replay)");
}

std::int64_t unix_now() {
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
        try {
            return std::stoll(epoch);
        } catch (const std::exception&) {
        }
    }
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

LlmClient::LlmClient(std::shared_ptr<Provider> provider, std::optional<fs::path> cache_dir, CacheMode mode,
                     Clock clock)
    : provider_(std::move(provider)), cache_(std::move(cache_dir)), mode_(mode), clock_(std::move(clock)) {
    if (!clock_) clock_ = unix_now;
    if (mode_ == CacheMode::record && !provider_) throw UsageError("record mode needs a provider");
}

ChatResponse LlmClient::complete(const ChatRequest& request) {
    if (request.temperature < 0) throw UsageError("temperature must be >= 0");
    const auto key = CacheKey::of(request);
    if (auto hit = cache_.get(key)) {
        {
            std::lock_guard lock(time_mutex_);
            latest_ = std::max(latest_, hit->created_at);
        }
        auto r = hit->response;
        r.retrieved_from_cache = true;
        return r;
    }
    if (mode_ == CacheMode::replay) throw LlmError(LlmError::Kind::cache_miss, "cache miss");
    auto r = provider_->complete(request);
    r.retrieved_from_cache = false;
    const auto now = clock_();
    cache_.put(key, request, r, now);
    {
        std::lock_guard lock(time_mutex_);
        latest_ = std::max(latest_, now);
    }
    return r;
}

std::int64_t LlmClient::latest_entry_time() const {
    std::lock_guard lock(time_mutex_);
    return latest_;
}

} // namespace procx
