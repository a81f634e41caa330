#ifndef BEREZIN_CLI_CACHE_HPP
#define BEREZIN_CLI_CACHE_HPP

// On-disk spectrum cache.  One file per (observable, k, assembly path,
// quadrature orders); payload layout, all integers and doubles little-endian:
//
//   "BZSC" | version u8 | key length u32 | key bytes | k i32 | n u32
//   | n eigenvalues f64 | n*n (re f64, im f64) row-major | provenance length u32
//   | provenance bytes | FNV-1a 64 checksum of everything before it

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "berezin/eigensolver.hpp"

namespace berezin::cli {

inline constexpr char kCacheMagic[4] = {'B', 'Z', 'S', 'C'};
inline constexpr std::uint8_t kCacheVersion = 1;
inline constexpr const char* kModelVersion = "cp1-berezin-1";

inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 1469598103934665603ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

struct CacheKey {
  std::string observable;  // canonical spec text
  int k = 0;
  std::string assembly;  // "closed" or "quadrature"
  int radial_order = 0;
  int angular_order = 0;

  std::string text() const {
    return std::string(kModelVersion) + "|" + observable + "|k=" + std::to_string(k) + "|" + assembly + "|" +
           std::to_string(radial_order) + "," + std::to_string(angular_order);
  }
  std::string file_name() const {
    const auto t = text();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx.bzc", static_cast<unsigned long long>(fnv1a(t.data(), t.size())));
    return buf;
  }
};

struct CacheEntry {
  SpectralData spectrum;
  std::string provenance;
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}
inline void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}
inline void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}
  bool take(std::size_t n) {
    if (pos_ + n > s_.size()) return false;
    pos_ += n;
    return true;
  }
  bool u8(std::uint8_t& v) {
    if (!take(1)) return false;
    v = static_cast<std::uint8_t>(s_[pos_ - 1]);
    return true;
  }
  bool u32(std::uint32_t& v) {
    if (!take(4)) return false;
    v = 0;
    for (int b = 0; b < 4; ++b) v |= std::uint32_t(static_cast<unsigned char>(s_[pos_ - 4 + b])) << (8 * b);
    return true;
  }
  bool u64(std::uint64_t& v) {
    if (!take(8)) return false;
    v = 0;
    for (int b = 0; b < 8; ++b) v |= std::uint64_t(static_cast<unsigned char>(s_[pos_ - 8 + b])) << (8 * b);
    return true;
  }
  bool f64(double& v) {
    std::uint64_t u;
    if (!u64(u)) return false;
    v = std::bit_cast<double>(u);
    return true;
  }
  bool str(std::string& v, std::size_t n) {
    if (!take(n)) return false;
    v = s_.substr(pos_ - n, n);
    return true;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return s_.size() - pos_; }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode_entry(const CacheKey& key, const CacheEntry& e) {
  std::string out(kCacheMagic, 4);
  out.push_back(static_cast<char>(kCacheVersion));
  const auto kt = key.text();
  detail::put_u32(out, static_cast<std::uint32_t>(kt.size()));
  out += kt;
  detail::put_u32(out, static_cast<std::uint32_t>(e.spectrum.k));
  const auto n = static_cast<std::uint32_t>(e.spectrum.dim());
  detail::put_u32(out, n);
  for (double l : e.spectrum.eigenvalues) detail::put_f64(out, l);
  for (const auto& z : e.spectrum.vectors) {
    detail::put_f64(out, z.real());
    detail::put_f64(out, z.imag());
  }
  detail::put_u32(out, static_cast<std::uint32_t>(e.provenance.size()));
  out += e.provenance;
  detail::put_u64(out, fnv1a(out.data(), out.size()));
  return out;
}

/// Decodes a payload; any inconsistency yields nullopt with a reason.
inline std::optional<CacheEntry> decode_entry(const std::string& bytes, const CacheKey& key, std::string& why) {
  detail::Reader r(bytes);
  std::string magic;
  if (!r.str(magic, 4) || magic != std::string(kCacheMagic, 4)) return why = "bad magic", std::nullopt;
  std::uint8_t version = 0;
  if (!r.u8(version)) return why = "truncated", std::nullopt;
  if (version != kCacheVersion) return why = "version mismatch", std::nullopt;
  std::uint32_t len = 0;
  std::string kt;
  if (!r.u32(len) || !r.str(kt, len)) return why = "truncated", std::nullopt;
  if (kt != key.text()) return why = "key mismatch", std::nullopt;
  std::uint32_t k = 0, n = 0;
  if (!r.u32(k) || !r.u32(n)) return why = "truncated", std::nullopt;
  if (static_cast<int>(k) != key.k || n != k + 1) return why = "dimension mismatch", std::nullopt;
  // the fixed-width block must fit before reading it
  const std::size_t need = 8ull * n + 16ull * n * n;
  if (r.remaining() < need + 12) return why = "truncated", std::nullopt;
  CacheEntry e;
  e.spectrum.k = static_cast<int>(k);
  e.spectrum.eigenvalues.resize(n);
  e.spectrum.vectors.resize(static_cast<std::size_t>(n) * n);
  for (auto& l : e.spectrum.eigenvalues) r.f64(l);
  for (auto& z : e.spectrum.vectors) {
    double re = 0, im = 0;
    r.f64(re);
    r.f64(im);
    z = {re, im};
  }
  if (!r.u32(len) || !r.str(e.provenance, len)) return why = "truncated", std::nullopt;
  const std::size_t body = r.pos();
  std::uint64_t sum = 0;
  if (!r.u64(sum)) return why = "truncated", std::nullopt;
  if (r.remaining() != 0) return why = "trailing bytes", std::nullopt;
  if (sum != fnv1a(bytes.data(), body)) return why = "checksum mismatch", std::nullopt;
  return e;
}

class SpectrumCache {
 public:
  SpectrumCache(std::filesystem::path dir, std::ostream* warnings) : dir_(std::move(dir)), warn_(warnings) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_))
      throw std::runtime_error("cannot create cache directory " + dir_.string());
  }

  std::filesystem::path path_for(const CacheKey& key) const { return dir_ / key.file_name(); }

  std::optional<CacheEntry> lookup(const CacheKey& key) {
    const auto path = path_for(key);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      ++misses_;
      return std::nullopt;
    }
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::string why;
    auto e = decode_entry(bytes, key, why);
    if (!e) {
      ++misses_;
      if (warn_) *warn_ << "warning: ignoring cache entry " << path.string() << ": " << why << "\n";
      return std::nullopt;
    }
    ++hits_;
    return e;
  }

  void store(const CacheKey& key, const CacheEntry& e) {
    const auto path = path_for(key);
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      const auto bytes = encode_entry(key, e);
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      if (!out) {
        if (warn_) *warn_ << "warning: could not write cache entry " << tmp.string() << "\n";
        return;
      }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec && warn_) *warn_ << "warning: could not publish cache entry " << path.string() << "\n";
  }

  int hits() const { return hits_; }
  int misses() const { return misses_; }

 private:
  std::filesystem::path dir_;
  std::ostream* warn_;
  int hits_ = 0;
  int misses_ = 0;
};

}  // namespace berezin::cli

#endif  // BEREZIN_CLI_CACHE_HPP
