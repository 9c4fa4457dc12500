#pragma once

#include <memory>
#include <string>

#include "vpb/collision.hpp"

namespace vpb {

// Disk cache for assembled L matrices. A file holds a magic line, the length of
// a JSON header (basis descriptor and hash, backend, quadrature exactness,
// tolerance, shape) and the matrix as little-endian doubles in row-major order.
inline constexpr const char* kCacheDirEnv = "VPBKIT_CACHE_DIR";

// $VPBKIT_CACHE_DIR when set, else `fallback`
std::string cache_directory(const std::string& fallback = "vpbkit-cache");

struct CacheOutcome {
  std::shared_ptr<const CollisionOperator> op;
  bool hit = false;
  std::string path;
  std::string notice;  // non-empty when a stale or unreadable file was rebuilt
};

std::string cache_file_name(const VelocityBasis& basis, const KernelSpec& kernel, const AssemblyOptions& opt);

// Loads L when a file with a matching basis hash exists, otherwise assembles and
// writes it. Synthetic operators are cheap and never cached.
CacheOutcome load_or_assemble(std::shared_ptr<const VelocityBasis> basis, const KernelSpec& kernel,
                              const AssemblyOptions& opt, const std::string& dir);

void write_matrix_file(const std::string& path, const std::string& header_json, const Mat& M);
// returns false when the file is missing or malformed
bool read_matrix_file(const std::string& path, std::string& header_json, Mat& M);

}  // namespace vpb
