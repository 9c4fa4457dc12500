#pragma once

#include <memory>

#include "vpb/collision.hpp"

namespace fixture {

inline std::shared_ptr<const vpb::VelocityBasis> basis(int N)
{
  return std::make_shared<const vpb::VelocityBasis>(N, 2 * N + 4);
}

// hard spheres at degree 6, shared by every test in one binary
inline const vpb::CollisionOperator& hard_sphere6()
{
  static const vpb::CollisionOperator op = vpb::assemble_L(basis(6), vpb::KernelSpec::hard_sphere());
  return op;
}

}  // namespace fixture
