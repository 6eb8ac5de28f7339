#pragma once
//
// Serialization of run artifacts: far-field CSV, near-field grids, interface
// data and content hashes. Files are assembled in memory and written as a
// set, so a failed run leaves nothing behind.
//

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include <boost/uuid/detail/sha1.hpp>

#include "msdd/common.hpp"

namespace msdd {

struct OutputError : Error { using Error::Error; };

/// 17 significant digits; non-finite values print as NaN.
inline std::string fmt17(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Git blob id: SHA-1 of "blob <size>\0<content>".
inline std::string git_blob_hash(const std::string& content) {
  boost::uuids::detail::sha1 h;
  const std::string head = "blob " + std::to_string(content.size());
  h.process_bytes(head.data(), head.size());
  const char nul = '\0';
  h.process_bytes(&nul, 1);
  h.process_bytes(content.data(), content.size());
  boost::uuids::detail::sha1::digest_type d;
  h.get_digest(d);
  char buf[41];
  for (int i = 0; i < 5; ++i) std::snprintf(buf + 8 * i, 9, "%08x", d[i]);
  return std::string(buf, 40);
}

/// theta, re, im, abs, rcs_db.
inline std::string far_field_csv(const std::vector<double>& theta, const CVector& u, const RVector& rcs) {
  std::string s = "theta,re,im,abs,rcs_db\n";
  for (std::size_t q = 0; q < theta.size(); ++q) {
    const auto i = static_cast<Eigen::Index>(q);
    s += fmt17(theta[q]) + ',' + fmt17(u[i].real()) + ',' + fmt17(u[i].imag()) + ',' +
         fmt17(std::abs(u[i])) + ',' + fmt17(rcs[i]) + '\n';
  }
  return s;
}

/// Header "nx ny x0 y0 dx dy", then one "re im" line per point, row-major
/// with x fastest.
inline std::string grid_file(int nx, int ny, double x0, double y0, double dx, double dy, const CVector& v) {
  if (v.size() != static_cast<Eigen::Index>(nx) * ny) throw OutputError("grid values do not match nx*ny");
  std::string s = std::to_string(nx) + ' ' + std::to_string(ny) + ' ' + fmt17(x0) + ' ' + fmt17(y0) + ' ' +
                  fmt17(dx) + ' ' + fmt17(dy) + '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i) s += fmt17(v[i].real()) + ' ' + fmt17(v[i].imag()) + '\n';
  return s;
}

/// Points of the grid in the order grid_file writes them.
inline std::vector<Vec2> grid_points(int nx, int ny, double x0, double y0, double dx, double dy) {
  std::vector<Vec2> p;
  p.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) p.emplace_back(x0 + i * dx, y0 + j * dy);
  return p;
}

/// Named file contents written together into one directory.
class ArtifactSet {
 public:
  void add(const std::string& name, std::string content) { files_[name] = std::move(content); }
  bool has(const std::string& name) const { return files_.count(name) > 0; }
  const std::string& content(const std::string& name) const { return files_.at(name); }
  const std::map<std::string, std::string>& files() const { return files_; }

  std::map<std::string, std::string> hashes() const {
    std::map<std::string, std::string> h;
    for (const auto& [n, c] : files_) h[n] = git_blob_hash(c);
    return h;
  }

  /// Hash of the sorted "<blob id> <name>" listing.
  std::string content_hash() const {
    std::string list;
    for (const auto& [n, h] : hashes()) list += h + ' ' + n + '\n';
    return git_blob_hash(list);
  }

  /// Writes every file; on failure removes what was written and, if it was
  /// created here, the directory.
  void write(const std::filesystem::path& dir) const {
    namespace fs = std::filesystem;
    std::error_code ec;
    const bool existed = fs::exists(dir, ec);
    std::vector<fs::path> done;
    try {
      fs::create_directories(dir);
      for (const auto& [n, c] : files_) {
        const fs::path p = dir / n;
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw OutputError("cannot open " + p.string() + " for writing");
        done.push_back(p);
        out.write(c.data(), static_cast<std::streamsize>(c.size()));
        out.close();
        if (!out) throw OutputError("failed writing " + p.string());
      }
    } catch (...) {
      for (const auto& p : done) fs::remove(p, ec);
      if (!existed) fs::remove(dir, ec);
      throw;
    }
  }

 private:
  std::map<std::string, std::string> files_;
};

}  // namespace msdd
