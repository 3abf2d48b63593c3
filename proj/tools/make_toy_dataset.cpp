// Writes a small cluster-separated dataset (features + manifest) for trying the CLI.
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "sparseret/features_io.hpp"
#include "sparseret/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a toy feature set and manifest"};
  std::string out = "toy";
  std::size_t subjects = 10;
  std::size_t per_subject = 12;
  std::size_t dim = 64;
  double spread = 0.05;
  std::uint64_t seed = 7;
  app.add_option("--out", out, "Output directory");
  app.add_option("--subjects", subjects, "Number of subjects");
  app.add_option("--per-subject", per_subject, "Vectors per subject");
  app.add_option("--dim", dim, "Feature dimension");
  app.add_option("--spread", spread, "Within-subject noise std");
  app.add_option("--seed", seed, "Random seed");
  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::create_directories(out);
    const auto data = sparseret::synthetic::clustered_dataset(subjects, per_subject, dim, spread, seed);
    sparseret::write_features(data.features, std::filesystem::path(out) / "features.fset",
                              sparseret::FeatureFormat::kBinary);
    sparseret::write_manifest(data.manifest, std::filesystem::path(out) / "manifest.csv");
    std::cout << "wrote " << data.features.count() << " vectors of dim " << dim << " to " << out << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
