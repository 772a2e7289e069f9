// Registered with WILL_FAIL: a pixelized disk is not a discrete eigenfunction,
// so p/u is far from constant near the rasterized boundary even though the
// median ratio is close to 2/r. Exits 1 while that stays true.
#include <spectv/eigenfactory.hpp>

#include <cstdio>

int main() {
  using namespace spectv;
  auto disk = disk_indicator(16, 64, 64, 128, 128);
  EigenCheck c = verify_eigenfunction(disk.grid, TvConfig{});
  const bool ok = c.maxRelDeviation <= 0.10;
  std::printf("%s disk r=16 ratio uniformity: maxRelDeviation=%.3f (<= 0.10), lambda_est=%.4f, support=%zu\n",
              ok ? "PASS" : "FAIL", c.maxRelDeviation, c.lambdaEst, c.supportSize);
  return ok ? 0 : 1;
}
