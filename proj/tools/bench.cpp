// Timing comparison of the parallel kernels against their serial reference
// implementations. Run: polarec_bench [width height reps]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>

#include "polarec/densify.hpp"
#include "polarec/geometry.hpp"
#include "polarec/polarization.hpp"
#include "polarec/synth.hpp"

using namespace polarec;
using Clock = std::chrono::steady_clock;

namespace {

template <typename F>
double time_best(int reps, F&& fn) {
  double best = 1e18;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = Clock::now();
    fn();
    best = std::min(best,
                    std::chrono::duration<double>(Clock::now() - t0).count());
  }
  return best;
}

void report(const char* name, double serial_s, double parallel_s) {
  std::printf("%-12s serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n",
              name, serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s);
}

}  // namespace

int main(int argc, char** argv) {
  const int w = argc > 1 ? std::atoi(argv[1]) : 640;
  const int h = argc > 2 ? std::atoi(argv[2]) : 480;
  const int reps = argc > 3 ? std::atoi(argv[3]) : 5;
  set_threads(0);
  std::printf("image %dx%d, best of %d runs\n", w, h, reps);

  SyntheticScene scene;
  scene.z_min = 0.5;
  scene.z_max = 10.0;
  scene.light.position = {0.4, -1.0, 0.5};
  Surface back;
  back.point = {0.0, 0.0, 4.0};
  back.normal = {0.1, 0.0, -1.0};
  back.material.checker = true;
  Surface ball;
  ball.type = Surface::Type::Sphere;
  ball.center = {0.0, 0.2, 2.2};
  ball.radius = 0.5;
  ball.material.ks = 0.8;
  scene.surfaces = {back, ball};

  CameraModel cam;
  cam.width = w;
  cam.height = h;
  cam.f = 1.5 * w;
  cam.cx = 0.5 * (w - 1);
  cam.cy = 0.5 * (h - 1);

  report("render",
         time_best(reps, [&] { serial::render_scene(scene, cam); }),
         time_best(reps, [&] { render_scene(scene, cam); }));

  const RenderResult r = render_scene(scene, cam);
  report("stokes",
         time_best(reps, [&] { serial::stokes_from_channels(r.frame); }),
         time_best(reps, [&] { stokes_from_channels(r.frame); }));

  DepthMap depth(w, h, scene.z_min, scene.z_max);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(1.0, 5.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if ((x + y) % 7) depth.set_depth(x, y, u(rng));
  const ImageGrid tau = tv_weights(r.gt.intensity, 3.0);
  report("tv_smooth",
         time_best(reps,
                   [&] { serial::tv_smooth_depth(depth, tau, 0.3, 10); }),
         time_best(reps, [&] { tv_smooth_depth(depth, tau, 0.3, 10); }));
  return 0;
}
