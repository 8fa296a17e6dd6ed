// Generates the committed 16x16 scene suite: rooms with furniture blocks and
// an optional partition wall, validated so every object is observable from
// some reachable pose and none is visible from the start.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lcom/rng.hpp"
#include "lcom/scene.hpp"

namespace {

const std::vector<std::string> kPhrases = {
    "the red cup on the table",     "the green mug on the left",  "the white bowl near the sink",
    "the blue book on the shelf",   "the small plant by the bed", "the black remote control",
    "the yellow sponge",            "the alarm clock",            "the apple on the counter",
    "the laptop on the desk",       "the pillow on the sofa",     "the soap bottle",
    "the gray teddy bear",          "the kettle on the stove",    "the tissue box",
};

lcom::Scene random_scene(lcom::Rng& rng, int size, const std::string& name) {
  auto pick = [&](int lo, int hi) { return lo + static_cast<int>(lcom::uniform_index(rng, hi - lo + 1)); };
  std::vector<bool> occ(static_cast<std::size_t>(size * size), false);
  auto set = [&](int x, int y) {
    if (x >= 0 && y >= 0 && x < size && y < size) occ[static_cast<std::size_t>(y * size + x)] = true;
  };

  // Partition wall with a doorway, in roughly half of the rooms.
  if (lcom::uniform01(rng) < 0.5) {
    const bool vertical = lcom::uniform01(rng) < 0.5;
    const int at = pick(5, size - 6);
    const int door = pick(2, size - 4);
    for (int t = 0; t < size; ++t) {
      if (t >= door && t < door + 3) continue;
      if (vertical) set(at, t);
      else set(t, at);
    }
  }
  const int blocks = pick(3, 6);
  for (int b = 0; b < blocks; ++b) {
    const int w = pick(1, 3);
    const int h = pick(1, 2);
    const int x0 = pick(0, size - w);
    const int y0 = pick(0, size - h);
    for (int y = y0; y < y0 + h; ++y)
      for (int x = x0; x < x0 + w; ++x) set(x, y);
  }
  lcom::OccupancyGrid grid(size, size, occ, 0.25);
  const auto free = grid.free_cells();
  const lcom::Cell object = free[lcom::uniform_index(rng, free.size())];
  const lcom::Cell start = free[lcom::uniform_index(rng, free.size())];
  const auto dir = lcom::kDirections[lcom::uniform_index(rng, 4)];
  return lcom::Scene{name, grid, object, kPhrases[lcom::uniform_index(rng, kPhrases.size())],
                     {start.x, start.y, dir}, lcom::FanParams{}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate a validated grid scene suite"};
  std::string out_dir = "scenes";
  int count = 20;
  int size = 16;
  std::uint64_t seed = 2023;
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--count", count, "number of scenes");
  app.add_option("--size", size, "grid side length");
  app.add_option("--seed", seed, "generator seed");
  CLI11_PARSE(app, argc, argv);

  std::filesystem::create_directories(out_dir);
  lcom::Rng rng(seed);
  int made = 0;
  int tries = 0;
  while (made < count) {
    ++tries;
    char name[32];
    std::snprintf(name, sizeof name, "scene_%02d", made);
    lcom::Scene s = random_scene(rng, size, name);
    const auto findings = lcom::validate_scene(s);
    if (!findings.empty()) continue;
    if (s.object_cell == s.robot_start.cell()) continue;
    std::ofstream(std::filesystem::path(out_dir) / (std::string(name) + ".scene")) << lcom::to_text(s);
    ++made;
  }
  std::cout << "wrote " << made << " scenes (" << tries << " candidates)\n";
  return 0;
}
