// Generates a synthetic sustained-vowel corpus (64 subjects, two vowels
// each, ALS-like and healthy voices) so the pipeline can be exercised
// without the clinical recordings. Writes WAVs plus manifest.csv and the
// reduced-set manifest_early.csv.

#include <CLI11.hpp>

#include <iostream>

#include "synthvoice.hpp"
#include "vowelmark/util.hpp"

int main(int argc, char** argv) {
  CLI::App app{"generate a synthetic demo corpus"};
  std::string dir;
  std::uint64_t seed = 20200131;
  app.add_option("dir", dir, "output directory")->required();
  app.add_option("--seed", seed, "generator seed");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto paths = vowelmark::synth::make_demo_corpus(dir, seed);
    std::cout << "manifest: " << paths.manifest << "\n"
              << "reduced set: " << paths.early_manifest << "\n";
  } catch (const std::exception& e) {
    vowelmark::log_error(e.what());
    return 1;
  }
  return 0;
}
