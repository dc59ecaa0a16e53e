#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "procx/corpus.hpp"
#include "procx/text.hpp"

namespace procx::testing {

inline std::filesystem::path source_dir() { return PROCX_SOURCE_DIR; }
inline std::filesystem::path data_dir() { return source_dir() / "data"; }
inline std::filesystem::path fixture(const std::string& rel) { return source_dir() / "tests" / "fixtures" / rel; }

inline SchemaDescriptor schema(const std::string& name) {
    return load_schema(data_dir() / "schemas" / (name + ".json"));
}

inline Dataset shipped(const std::string& name) {
    if (name == "pet") return load_pet(data_dir() / "datasets" / "pet.jsonl", schema("pet"));
    return load_constraint_dataset(data_dir() / "datasets" / (name + ".jsonl"), schema(name));
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("procx-" + tag + "-" + text::hex64((static_cast<std::uint64_t>(rd()) << 32) | rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

// Whitespace-tokenized single-sentence document, no annotations.
inline Document words_document(const std::string& id, const std::string& text) {
    Document d;
    d.id = id;
    d.raw_text = text;
    int i = 0;
    for (auto w : text::split(text, ' ')) {
        if (w.empty()) continue;
        d.tokens.push_back({std::string(w), i++, 0});
    }
    return d;
}

inline std::string add_mention(Document& d, const std::string& type, std::vector<int> indices) {
    std::string id = "m" + std::to_string(d.mentions.size());
    d.mentions.push_back({id, type, std::move(indices)});
    return id;
}

} // namespace procx::testing
