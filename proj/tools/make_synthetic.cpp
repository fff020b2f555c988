// Writes a dataset from the correlated synthetic generator as CSV.
#include <iostream>

#include <CLI11.hpp>

#include "nldd/data.hpp"
#include "nldd/eval.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a correlated multi-label dataset"};
  nldd::SyntheticParams p;
  std::string out;
  app.add_option("--rows", p.n, "Instances");
  app.add_option("--features", p.d, "Features");
  app.add_option("--labels", p.labels, "Labels");
  app.add_option("--correlation", p.correlation, "Label correlation in [0, 1]");
  app.add_option("--noise", p.noise, "Noise scale");
  app.add_option("--curvature", p.curvature, "Bend of the shared label factor");
  app.add_option("--seed", p.seed, "Random seed");
  app.add_option("--out", out, "Output CSV")->required();
  CLI11_PARSE(app, argc, argv);
  try {
    nldd::write_csv(nldd::generate_synthetic(p), out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
