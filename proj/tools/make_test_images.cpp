// Generates the three procedural grayscale test images shipped in data/.
// Everything is synthesized from closed-form shapes and seeded value noise,
// so the images carry no third-party rights.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>

#include "gencom/image.hpp"
#include "gencom/rng.hpp"

namespace {

constexpr std::size_t kSize = 512;
// Scene layouts below are written on a 256-unit canvas.
constexpr double kScale = kSize / 256.0;

// Multi-octave value noise in roughly [-1, 1].
double value_noise(std::uint64_t seed, double x, double y, int octaves, double base_freq = 1.0 / 32.0) {
  double amp = 1.0, freq = base_freq, sum = 0.0, norm = 0.0;
  for (int o = 0; o < octaves; ++o) {
    const double fx = x * freq, fy = y * freq;
    const auto ix = static_cast<std::int64_t>(std::floor(fx)), iy = static_cast<std::int64_t>(std::floor(fy));
    const double tx = fx - static_cast<double>(ix), ty = fy - static_cast<double>(iy);
    auto lattice = [&](std::int64_t a, std::int64_t b) {
      const auto key = static_cast<std::uint64_t>((a & 0xFFFF) | ((b & 0xFFFF) << 16) | (std::int64_t{o} << 32));
      return 2.0 * gencom::counter_uniform(seed, key) - 1.0;
    };
    auto smooth = [](double t) { return t * t * (3 - 2 * t); };
    const double sx = smooth(tx), sy = smooth(ty);
    const double top = lattice(ix, iy) * (1 - sx) + lattice(ix + 1, iy) * sx;
    const double bot = lattice(ix, iy + 1) * (1 - sx) + lattice(ix + 1, iy + 1) * sx;
    sum += amp * (top * (1 - sy) + bot * sy);
    norm += amp;
    amp *= 0.5;
    freq *= 2.0;
  }
  return sum / norm;
}

double soft_step(double d, double width) { return 0.5 * (1.0 + std::tanh(d / width)); }

// Fine detail (foliage, fabric, surface grain) on top of the smooth layout.
double texture(std::uint64_t seed, double x, double y) { return value_noise(seed, x * kScale, y * kScale, 3, 1.0 / 3.0); }

// Sensor-like per-pixel grain, roughly Gaussian with unit variance.
double grain(double x, double y) {
  const auto key = static_cast<std::uint64_t>(x) * 4099 + static_cast<std::uint64_t>(y);
  return gencom::counter_gaussian_pair(0x6772, key).first;
}

gencom::Image render(const std::function<double(double, double)>& fn) {
  gencom::Image img(kSize, kSize, 1);
  for (std::size_t y = 0; y < kSize; ++y)
    for (std::size_t x = 0; x < kSize; ++x)
      img.at(x, y) = static_cast<std::uint8_t>(
          std::clamp(std::lround(fn(x / kScale, y / kScale) + 3.0 * grain(double(x), double(y))), 0L, 255L));
  return img;
}

// Sky gradient, sun, two ridgelines and textured ground.
gencom::Image landscape() {
  return render([](double x, double y) {
    double v = 200.0 - 0.35 * y;
    const double sun = std::hypot(x - 190, y - 60);
    v += 45.0 * (1.0 - soft_step(sun - 22, 2.0));
    const double ridge1 = 120 + 18 * std::sin(x / 37.0) + 10 * std::sin(x / 13.0 + 1.0);
    const double ridge2 = 165 + 12 * std::sin(x / 29.0 + 2.0);
    const double m1 = soft_step(y - ridge1, 1.5), m2 = soft_step(y - ridge2, 1.5);
    v = v * (1 - m1) + (110 - 0.2 * (y - ridge1) + 14 * value_noise(11, x, y, 4) + 22 * texture(13, x, y)) * m1;
    v = v * (1 - m2) + (70 + 0.25 * (y - ridge2) + 18 * value_noise(12, x, y, 5) + 30 * texture(14, x, y)) * m2;
    return v;
  });
}

// Soft elliptical "face" with features over a vignetted background.
gencom::Image portrait() {
  return render([](double x, double y) {
    const double r = std::hypot(x - 128, y - 128) / 181.0;
    double v = 150 - 70 * r * r + 10 * value_noise(21, x, y, 3) + 16 * texture(23, x, y);
    const double head = std::hypot((x - 128) / 70.0, (y - 120) / 92.0);
    const double hm = 1.0 - soft_step(head - 1.0, 0.03);
    const double shade = 185 - 40 * ((x - 128) / 70.0) - 25 * ((y - 120) / 92.0);
    v = v * (1 - hm) + shade * hm;
    for (double ex : {100.0, 156.0}) {
      const double e = std::hypot((x - ex) / 12.0, (y - 105) / 7.0);
      v -= 90 * hm * (1.0 - soft_step(e - 1.0, 0.15));
    }
    const double mouth = std::hypot((x - 128) / 26.0, (y - 170) / 6.0);
    v -= 60 * hm * (1.0 - soft_step(mouth - 1.0, 0.2));
    const double hair = soft_step(70 - y + 8 * std::sin(x / 9.0), 3.0) * hm;
    v = v * (1 - hair) + (45 + 15 * value_noise(22, x, y, 5) + 28 * texture(24, x, y)) * hair;
    return v;
  });
}

// Shaded spheres and a box on a floor gradient.
gencom::Image objects() {
  return render([](double x, double y) {
    double v = 90 + 0.4 * y + 12 * value_noise(31, x, y, 4) + 18 * texture(32, x, y);
    const double box = std::max(std::abs(x - 70) / 40.0, std::abs(y - 170) / 30.0);
    const double bm = 1.0 - soft_step(box - 1.0, 0.02);
    v = v * (1 - bm) + (60 + 0.5 * (x - 30)) * bm;
    struct Ball { double cx, cy, rad, base; };
    for (const Ball b : {Ball{170, 90, 48, 210}, Ball{185, 195, 32, 140}, Ball{80, 75, 28, 235}}) {
      const double d = std::hypot(x - b.cx, y - b.cy);
      const double m = 1.0 - soft_step(d - b.rad, 1.2);
      const double lx = (x - b.cx + 0.35 * b.rad) / b.rad, ly = (y - b.cy + 0.35 * b.rad) / b.rad;
      const double lit = b.base - 110 * std::min(1.0, lx * lx + ly * ly) * 0.6;
      v = v * (1 - m) + lit * m;
    }
    return v;
  });
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path out = argc > 1 ? argv[1] : "data";
  std::filesystem::create_directories(out);
  gencom::save_image(landscape(), out / "landscape.pgm");
  gencom::save_image(portrait(), out / "portrait.pgm");
  gencom::save_image(objects(), out / "objects.pgm");
  std::printf("wrote 3 test images to %s\n", out.string().c_str());
  return 0;
}
