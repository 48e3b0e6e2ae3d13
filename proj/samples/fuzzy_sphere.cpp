// Fit a 3x3 matrix configuration to points on the unit sphere and read off
// the intrinsic dimension from the quantum metric at every point.

#include <iostream>

#include "qcml/data.hpp"
#include "qcml/estimator.hpp"
#include "qcml/training.hpp"

int main(int argc, char** argv) {
    const double noise = argc > 1 ? std::stod(argv[1]) : 0.0;
    const auto ds = qcml::gen_sphere(500, 0, noise, 1);

    qcml::TrainConfig cfg;
    cfg.hilbert_dim = 3;
    cfg.epochs = 1000;
    cfg.seed = 1;
    const auto fit = qcml::train(ds.points, cfg);
    std::cout << "loss " << fit.report.initial_loss << " -> " << fit.report.final_loss << "\n";

    const auto rep = qcml::estimate_dimensions(fit.config, ds.points);
    std::cout << "mode " << rep.global_mode << ", mean " << rep.mean_local_dim << ", skipped " << rep.skipped_count
              << "\n";

    // The metric at the first point: two eigenvalues near 1 (tangent), one near 0.
    std::cout << "g eigenvalues at point 0: " << rep.spectra[0].transpose() << "\n";
    return 0;
}
