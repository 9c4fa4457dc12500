#include "vpb/collision_cache.hpp"

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "vpb/hash.hpp"

namespace vpb {

namespace {

const char kMagic[] = "VPBKIT-MATRIX 1\n";

void put_u64(std::ostream& os, std::uint64_t v)
{
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

bool get_u64(std::istream& is, std::uint64_t& v)
{
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) return false;
  v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return true;
}

void put_f64(std::ostream& os, double d)
{
  std::uint64_t u;
  std::memcpy(&u, &d, 8);
  put_u64(os, u);
}

bool get_f64(std::istream& is, double& d)
{
  std::uint64_t u;
  if (!get_u64(is, u)) return false;
  std::memcpy(&d, &u, 8);
  return true;
}

int resolved_exactness(const VelocityBasis& basis, const AssemblyOptions& opt)
{
  return opt.exactness < 0 ? 2 * basis.max_degree() : opt.exactness;
}

}  // namespace

std::string cache_directory(const std::string& fallback)
{
  const char* env = std::getenv(kCacheDirEnv);
  return (env && *env) ? std::string(env) : fallback;
}

std::string cache_file_name(const VelocityBasis& basis, const KernelSpec& kernel, const AssemblyOptions& opt)
{
  const std::string key = kernel.describe() + "|N=" + std::to_string(basis.max_degree()) +
                          "|q=" + std::to_string(basis.quad_order()) +
                          "|p=" + std::to_string(resolved_exactness(basis, opt));
  return "L-" + to_string(kernel.backend) + "-N" + std::to_string(basis.max_degree()) + "-" + hex64(fnv1a64(key)) +
         ".bin";
}

void write_matrix_file(const std::string& path, const std::string& header_json, const Mat& M)
{
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cache: cannot write " + tmp.string());
    os.write(kMagic, sizeof kMagic - 1);
    put_u64(os, header_json.size());
    os.write(header_json.data(), static_cast<std::streamsize>(header_json.size()));
    for (Eigen::Index i = 0; i < M.rows(); ++i)
      for (Eigen::Index j = 0; j < M.cols(); ++j) put_f64(os, M(i, j));
    if (!os) throw Error("cache: short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

bool read_matrix_file(const std::string& path, std::string& header_json, Mat& M)
{
  std::ifstream is(path, std::ios::binary);
  if (!is) return false;
  char magic[sizeof kMagic - 1];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) return false;
  std::uint64_t len;
  if (!get_u64(is, len) || len > (1u << 20)) return false;
  header_json.assign(len, '\0');
  if (!is.read(header_json.data(), static_cast<std::streamsize>(len))) return false;
  const auto j = nlohmann::json::parse(header_json, nullptr, false);
  if (j.is_discarded() || !j.contains("rows") || !j.contains("cols")) return false;
  const auto rows = j["rows"].get<long>(), cols = j["cols"].get<long>();
  if (rows <= 0 || cols <= 0 || rows > 100000 || cols > 100000) return false;
  M.resize(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long k = 0; k < cols; ++k)
      if (!get_f64(is, M(i, k))) return false;
  return is.peek() == std::char_traits<char>::eof();
}

CacheOutcome load_or_assemble(std::shared_ptr<const VelocityBasis> basis, const KernelSpec& kernel,
                              const AssemblyOptions& opt, const std::string& dir)
{
  CacheOutcome out;
  const int p = resolved_exactness(*basis, opt);
  if (!kernel.genuine()) {
    out.op = std::make_shared<const CollisionOperator>(assemble_L(basis, kernel, opt));
    return out;
  }
  out.path = (std::filesystem::path(dir) / cache_file_name(*basis, kernel, opt)).string();
  std::string header;
  Mat L;
  if (std::filesystem::exists(out.path)) {
    if (read_matrix_file(out.path, header, L)) {
      const auto j = nlohmann::json::parse(header);
      if (j.value("basis_hash", "") == basis->hash() && L.rows() == basis->dim() && L.cols() == basis->dim()) {
        out.op = std::make_shared<const CollisionOperator>(basis, kernel, std::move(L), p);
        out.hit = true;
        return out;
      }
      out.notice = "cache: basis hash mismatch in " + out.path + ", rebuilding";
    } else {
      out.notice = "cache: unreadable file " + out.path + ", rebuilding";
    }
  }
  out.op = std::make_shared<const CollisionOperator>(assemble_L(basis, kernel, opt));
  const Mat& A = out.op->L();
  nlohmann::ordered_json h;
  h["schema"] = 1;
  h["basis_hash"] = basis->hash();
  h["basis"] = nlohmann::json::parse(basis->descriptor_json());
  h["backend"] = to_string(kernel.backend);
  h["kernel"] = kernel.describe();
  h["exactness"] = p;
  h["tol_quad"] = opt.tol_quad;
  h["rows"] = A.rows();
  h["cols"] = A.cols();
  write_matrix_file(out.path, h.dump(), A);
  return out;
}

}  // namespace vpb
