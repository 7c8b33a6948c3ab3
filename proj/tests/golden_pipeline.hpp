#ifndef DYNTOK_GOLDEN_PIPELINE_HPP
#define DYNTOK_GOLDEN_PIPELINE_HPP

// The corpus run behind tests/golden: for every scene in corpus/, the bytes
// that `dyntok generate --seed 7` followed by
// `dyntok compress --threshold 0.6 --scale 4 [--pool2]` would write
// (pooling only for 28x28 scenes). Returned as file name -> content.

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "dyntok/dyntok.hpp"

namespace dyntok::testing {

inline constexpr std::uint64_t kGoldenSeed = 7;
inline constexpr float kGoldenThreshold = 0.6f;
inline constexpr std::uint32_t kGoldenScale = 4;
inline const char* const kCorpusScenes[] = {"desk", "constant", "orthogonal"};

inline std::map<std::string, std::string> golden_outputs(const std::filesystem::path& corpus_dir, const Exec& exec) {
  std::map<std::string, std::string> files;
  for (const char* name : kCorpusScenes) {
    const auto scene = scene_from_json(nlohmann::json::parse(byteio::read_file(corpus_dir / (std::string(name) + ".json"))));
    const auto grid = generate_synthetic(scene, kGoldenSeed);
    files[std::string(name) + ".dtg"] = encode_grid(grid);

    std::optional<PoolSpec> pooling;
    if (grid.rows() == 28 && grid.cols() == 28) pooling = PoolSpec::bilinear2();
    const auto run = compress(grid, Threshold(kGoldenThreshold), pooling, exec);
    files[std::string(name) + ".dtcs"] = encode_sequence(run.sequence);
    files[std::string(name) + "_stats.json"] = stats_to_json(run.stats).dump(2) + "\n";
    files[std::string(name) + "_groups.json"] = groups_to_json(run.groups).dump() + "\n";
    const auto masks = render_mask(run.groups, kGoldenScale);
    for (std::uint32_t f = 0; f < masks.size(); ++f)
      files[mask_filename(name, f, kGoldenThreshold)] = encode_pnm(masks[f]);
  }
  return files;
}

}  // namespace dyntok::testing

#endif  // DYNTOK_GOLDEN_PIPELINE_HPP
