// dyntok command-line driver: generate, compress, sweep, budget, render.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dyntok/dyntok.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct RunConfig {
  std::string input;
  std::string output = ".";
  float threshold = dyntok::kDefaultThreshold;
  std::vector<float> thresholds{dyntok::kTrainingThresholds.begin(), dyntok::kTrainingThresholds.end()};
  bool pool2 = false;
  std::uint32_t scale = 0;
  std::uint64_t seed = 0;
  std::string scene;
  std::vector<std::uint32_t> frames{32, 64, 96, 128, 160};
  std::vector<double> ratios{1.0};
  std::uint32_t rows = 14;
  std::uint32_t cols = 14;
  std::string overlay;
};

// Failure at a named pipeline stage; reported as "error [stage]: ...".
struct StageError {
  std::string stage;
  std::string message;
};

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const dyntok::Error& e) {
    throw StageError{name, e.what()};
  } catch (const std::exception& e) {
    throw StageError{name, e.what()};
  }
}

const CLI::Validator kThresholdRange(
    [](std::string& value) -> std::string {
      try {
        const float t = std::stof(value);
        if (t > -1.0f && t <= 1.0f) return {};
      } catch (const std::exception&) {
      }
      return "threshold " + value + " outside (-1, 1]";
    },
    "in (-1, 1]");

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

void write_text(const fs::path& path, const std::string& text) { dyntok::byteio::write_file_atomic(path, text); }

nlohmann::ordered_json config_echo(const RunConfig& cfg, const std::string& command) {
  nlohmann::ordered_json doc;
  doc["command"] = command;
  doc["version"] = dyntok::kVersion;
  nlohmann::ordered_json c;
  if (!cfg.input.empty()) c["in"] = cfg.input;
  c["pool2"] = cfg.pool2;
  c["scale"] = cfg.scale;
  if (command == "compress" || command == "render") c["threshold"] = cfg.threshold;
  if (command == "sweep") c["thresholds"] = cfg.thresholds;
  if (command == "generate") {
    c["scene"] = cfg.scene;
    c["seed"] = cfg.seed;
  }
  if (command == "budget") {
    c["rows"] = cfg.rows;
    c["cols"] = cfg.cols;
    c["frames"] = cfg.frames;
    c["ratios"] = cfg.ratios;
  }
  doc["config"] = std::move(c);
  return doc;
}

void write_manifest(const fs::path& dir, nlohmann::ordered_json manifest, const std::vector<std::string>& artifacts) {
  manifest["artifacts"] = artifacts;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

dyntok::FrameGridPair load_input(const RunConfig& cfg, const dyntok::Exec& exec) {
  auto grid = stage("load", [&] { return dyntok::load_grid(cfg.input); });
  if (!cfg.pool2) return grid;
  return stage("pool", [&] { return dyntok::pool(grid, dyntok::PoolSpec::bilinear2(), exec); });
}

fs::path prepare_output(const RunConfig& cfg) {
  return stage("output", [&] {
    fs::create_directories(cfg.output);
    return fs::path(cfg.output);
  });
}

std::vector<std::string> write_masks(const fs::path& dir, const std::string& stem, const dyntok::GroupMap& groups,
                                     std::uint32_t scale, const std::optional<dyntok::MaskImage>& overlay) {
  std::vector<std::string> names;
  const auto masks = dyntok::render_mask(groups, scale);
  for (std::uint32_t f = 0; f < masks.size(); ++f) {
    const auto name = dyntok::mask_filename(stem, f, groups.threshold().value());
    dyntok::save_image(masks[f], dir / name);
    names.push_back(name);
    if (overlay) {
      const auto oname = dyntok::mask_filename(stem + "_overlay", f, groups.threshold().value(), "ppm");
      dyntok::save_image(dyntok::render_overlay(groups, f, scale, *overlay), dir / oname);
      names.push_back(oname);
    }
  }
  return names;
}

int cmd_generate(const RunConfig& cfg) {
  const auto spec = stage("scene", [&] {
    auto doc = nlohmann::json::parse(dyntok::byteio::read_file(cfg.scene));
    return dyntok::scene_from_json(doc);
  });
  const auto grid = stage("generate", [&] { return dyntok::generate_synthetic(spec, cfg.seed); });
  stage("write", [&] {
    const fs::path out(cfg.output);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    dyntok::save_grid(grid, out);
    return 0;
  });
  std::cout << "wrote " << cfg.output << " " << dyntok::to_string(grid.shape()) << " d_clip=" << grid.d_clip()
            << " d_emb=" << grid.d_emb() << "\n";
  return 0;
}

int cmd_compress(const RunConfig& cfg, const dyntok::Exec& exec) {
  const auto grid = load_input(cfg, exec);
  const auto result = stage("compress", [&] { return dyntok::compress(grid, dyntok::Threshold(cfg.threshold), std::nullopt, exec); });
  const auto dir = prepare_output(cfg);
  const auto stem = stem_of(cfg.input);
  std::vector<std::string> artifacts;
  stage("write", [&] {
    dyntok::save_sequence(result.sequence, dir / (stem + ".dtcs"));
    artifacts.push_back(stem + ".dtcs");
    write_text(dir / (stem + "_stats.json"), dyntok::stats_to_json(result.stats).dump(2) + "\n");
    artifacts.push_back(stem + "_stats.json");
    write_text(dir / (stem + "_groups.json"), dyntok::groups_to_json(result.groups).dump() + "\n");
    artifacts.push_back(stem + "_groups.json");
    if (cfg.scale > 0) {
      auto masks = write_masks(dir, stem, result.groups, cfg.scale, std::nullopt);
      artifacts.insert(artifacts.end(), masks.begin(), masks.end());
    }
    write_manifest(dir, config_echo(cfg, "compress"), artifacts);
    return 0;
  });
  const auto& s = result.stats;
  std::printf("threshold %s: kept %llu of %llu tokens (fused %llu + markers %llu), ratio %.3f\n",
              dyntok::format_threshold(cfg.threshold).c_str(), static_cast<unsigned long long>(s.total()),
              static_cast<unsigned long long>(s.original + s.markers), static_cast<unsigned long long>(s.fused),
              static_cast<unsigned long long>(s.markers), s.ratio);
  return 0;
}

int cmd_sweep(const RunConfig& cfg, const dyntok::Exec& exec) {
  const auto grid = load_input(cfg, exec);
  std::vector<float> thresholds = cfg.thresholds;
  const auto sims = stage("similarity", [&] { return dyntok::adjacent_cosine(grid, exec); });
  const auto sweep = stage("sweep", [&] { return dyntok::threshold_sweep(sims, thresholds, exec); });
  const auto dir = prepare_output(cfg);
  const auto stem = stem_of(cfg.input);
  std::vector<std::string> artifacts;
  stage("write", [&] {
    write_text(dir / (stem + "_sweep.csv"), dyntok::sweep_to_csv(sweep));
    artifacts.push_back(stem + "_sweep.csv");
    const std::uint32_t scale = cfg.scale > 0 ? cfg.scale : 8;
    std::vector<dyntok::GroupMap> maps;
    for (float t : thresholds) maps.push_back(dyntok::build_groups(sims, dyntok::Threshold(t)));
    const auto tiles = dyntok::render_sweep(maps, scale);
    for (std::uint32_t f = 0; f < tiles.size(); ++f) {
      const auto name = stem + "_f" + std::to_string(f) + "_sweep.pgm";
      dyntok::save_image(tiles[f], dir / name);
      artifacts.push_back(name);
    }
    auto manifest = config_echo(cfg, "sweep");
    auto records = nlohmann::ordered_json::array();
    for (const auto& s : sweep) records.push_back(dyntok::stats_to_json(s));
    manifest["stats"] = std::move(records);
    write_manifest(dir, std::move(manifest), artifacts);
    return 0;
  });
  for (const auto& s : sweep)
    std::printf("threshold %s: ratio %.3f (%llu tokens)\n", dyntok::format_threshold(*s.threshold).c_str(), s.ratio,
                static_cast<unsigned long long>(s.total()));
  return 0;
}

int cmd_budget(const RunConfig& cfg) {
  const auto points = stage("budget", [&] { return dyntok::budget_curve(cfg.rows, cfg.cols, cfg.frames, cfg.ratios); });
  const auto csv = dyntok::budget_to_csv(points);
  if (cfg.output.empty() || cfg.output == "-") {
    std::cout << csv;
    return 0;
  }
  const auto dir = prepare_output(cfg);
  stage("write", [&] {
    write_text(dir / "budget.csv", csv);
    write_manifest(dir, config_echo(cfg, "budget"), {"budget.csv"});
    return 0;
  });
  std::cout << csv;
  return 0;
}

int cmd_render(const RunConfig& cfg, const dyntok::Exec& exec) {
  const auto grid = load_input(cfg, exec);
  const auto groups = stage("group", [&] {
    return dyntok::build_groups(dyntok::adjacent_cosine(grid, exec), dyntok::Threshold(cfg.threshold));
  });
  std::optional<dyntok::MaskImage> overlay;
  if (!cfg.overlay.empty()) overlay = stage("overlay", [&] { return dyntok::load_image(cfg.overlay); });
  const auto dir = prepare_output(cfg);
  const auto stem = stem_of(cfg.input);
  const std::uint32_t scale = cfg.scale > 0 ? cfg.scale : 8;
  stage("write", [&] {
    auto artifacts = write_masks(dir, stem, groups, scale, overlay);
    write_manifest(dir, config_echo(cfg, "render"), artifacts);
    for (const auto& a : artifacts) std::cout << "wrote " << (dir / a).string() << "\n";
    return 0;
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic visual-token compression for video patch grids"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dyntok::kVersion);
  RunConfig cfg;

  auto* generate = app.add_subcommand("generate", "Generate a synthetic DTG grid from a scene spec");
  generate->add_option("--scene", cfg.scene, "Scene-spec JSON")->required()->check(CLI::ExistingFile);
  generate->add_option("--seed", cfg.seed, "Random seed");
  generate->add_option("--out", cfg.output, "Output DTG path")->required();

  auto* compress = app.add_subcommand("compress", "Compress a DTG grid");
  auto* sweep = app.add_subcommand("sweep", "Sweep thresholds over a DTG grid");
  auto* render = app.add_subcommand("render", "Render merge masks for a DTG grid");
  for (auto* sub : {compress, sweep, render}) {
    sub->add_option("--in", cfg.input, "Input DTG file")->required();
    sub->add_option("--out", cfg.output, "Output directory");
    sub->add_flag("--pool2", cfg.pool2, "Apply 2x2 stride-2 bilinear pooling first");
    sub->add_option("--scale", cfg.scale, "Pixels per patch for masks");
  }
  for (auto* sub : {compress, render})
    sub->add_option("--threshold", cfg.threshold, "Merge threshold in (-1, 1]")->check(kThresholdRange);
  sweep->add_option("--thresholds", cfg.thresholds, "Ascending thresholds, comma separated")
      ->delimiter(',')
      ->check(kThresholdRange);
  render->add_option("--overlay", cfg.overlay, "RGB PPM raster to blend the mask over")->check(CLI::ExistingFile);

  auto* budget = app.add_subcommand("budget", "Token budget versus frame count");
  budget->add_option("--frames", cfg.frames, "Frame counts, comma separated")->delimiter(',');
  budget->add_option("--ratios", cfg.ratios, "Kept-token ratios in (0, 1], comma separated")->delimiter(',');
  budget->add_option("--rows", cfg.rows, "Patch rows per frame");
  budget->add_option("--cols", cfg.cols, "Patch columns per frame");
  budget->add_option("--out", cfg.output, "Output directory (stdout only when omitted)");

  // CLI11 reports its own codes; this tool folds every parse failure into 2.
  try {
    cfg.output.clear();
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  auto usage = [](const std::string& msg) {
    std::cerr << "usage error: " << msg << "\n";
    return kExitUsage;
  };
  if (budget->parsed()) {
    if (cfg.frames.empty()) return usage("--frames needs at least one frame count");
    if (cfg.ratios.empty()) return usage("--ratios needs at least one ratio");
    for (double r : cfg.ratios)
      if (!(r > 0.0 && r <= 1.0)) return usage("--ratios values must lie in (0, 1]");
    for (auto f : cfg.frames)
      if (f == 0) return usage("--frames values must be positive");
  }
  if (sweep->parsed()) {
    if (cfg.thresholds.empty()) return usage("--thresholds needs at least one value");
    for (std::size_t i = 1; i < cfg.thresholds.size(); ++i)
      if (!(cfg.thresholds[i] > cfg.thresholds[i - 1])) return usage("--thresholds must be strictly ascending");
  }
  if (!budget->parsed() && cfg.output.empty()) cfg.output = ".";

  const auto exec = dyntok::Exec::from_env();
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (generate->parsed()) return cmd_generate(cfg);
    if (compress->parsed()) return cmd_compress(cfg, exec);
    if (sweep->parsed()) return cmd_sweep(cfg, exec);
    if (budget->parsed()) return cmd_budget(cfg);
    if (render->parsed()) return cmd_render(cfg, exec);
  } catch (const StageError& e) {
    std::cerr << "dyntok " << command << ": error [" << e.stage << "]: " << e.message << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
