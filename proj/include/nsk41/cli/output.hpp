#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <mutex>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "json.hpp"
#include "nsk41/snapshot.hpp"

namespace nsk41::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

/// Shortest round-trip decimal; nan and inf spelled out.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{}", v);
}

/// NaN and infinities become null.
inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw std::runtime_error("sha256: cannot allocate digest context");
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 &&
                    EVP_DigestFinal_ex(ctx, digest, &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) throw std::runtime_error("sha256: digest failed");
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

inline std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class Table {
public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

    void add(const std::vector<double>& row) {
        std::vector<std::string> cells;
        cells.reserve(row.size());
        for (double v : row) cells.push_back(format_number(v));
        add_cells(std::move(cells));
    }
    void add_cells(std::vector<std::string> cells) {
        if (cells.size() != header_.size()) throw std::logic_error("Table: row width does not match header");
        rows_.push_back(std::move(cells));
    }

    std::string str() const {
        std::string out;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) out += ',';
                out += cells[i];
            }
            out += '\n';
        };
        line(header_);
        for (const auto& r : rows_) line(r);
        return out;
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// An output directory; files are recorded for the manifest in write order.
class OutputDir {
public:
    explicit OutputDir(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

    const fs::path& root() const { return root_; }

    void text(const std::string& name, const std::string& content) {
        const fs::path p = root_ / name;
        fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out) throw std::runtime_error("cannot write " + p.string());
        record(name);
    }
    void csv(const std::string& name, const Table& t) { text(name, t.str()); }
    void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }
    void snapshot(const std::string& name, const SpectralField& f, double ell0) {
        const fs::path p = root_ / name;
        fs::create_directories(p.parent_path());
        snapshot::write_file(p.string(), f, ell0);
        record(name);
    }

    /// Files written so far, sorted, with their SHA-256.
    json checksums() const {
        std::vector<std::string> names;
        {
            std::lock_guard lock(mutex_);
            names = files_;
        }
        std::sort(names.begin(), names.end());
        names.erase(std::unique(names.begin(), names.end()), names.end());
        json out = json::array();
        for (const auto& n : names) {
            const std::string bytes = read_bytes(root_ / n);
            out.push_back({{"path", n}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
        }
        return out;
    }

    OutputDir sub(const std::string& name) const { return OutputDir(root_ / name); }

    void adopt(const std::string& prefix, const OutputDir& child) {
        std::lock_guard lock(mutex_);
        for (const auto& f : child.files()) files_.push_back(prefix + "/" + f);
    }

    std::vector<std::string> files() const {
        std::lock_guard lock(mutex_);
        return files_;
    }

private:
    void record(const std::string& name) {
        std::lock_guard lock(mutex_);
        files_.push_back(name);
    }

    fs::path root_;
    mutable std::mutex mutex_;
    std::vector<std::string> files_;
};

}  // namespace nsk41::cli
