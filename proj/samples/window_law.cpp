// Draws exact windows for a finite-support model and prints the empirical
// window law next to the oracle's.
//
//   window_law [replicas] [seed]

#include <cstdio>
#include <cstdlib>
#include <vector>

#include "perfsamp/perfsamp.hpp"

int main(int argc, char** argv)
{
    using namespace perfsamp;
    const int replicas = argc > 1 ? std::atoi(argv[1]) : 20000;
    const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 0) : 1;

    const auto model = CoefficientModel::finite({0.4, -0.35, 0.25});
    std::printf("%s: %s\n", model.describe().c_str(), classify(model).headline().c_str());

    const auto oracle = build_oracle(model);
    const auto exact = exact_window_law(oracle, stationary_distributions(oracle).front(), 3);

    std::vector<SampleWindow> windows;
    for (int r = 0; r < replicas; ++r)
        windows.push_back(perfect_simulate(model, 3, stream_seed(seed, static_cast<std::uint64_t>(r))));
    const auto emp = empirical_window_distribution(windows, 3);

    for (std::uint32_t x = 0; x < exact.size(); ++x) {
        char w[4] = {};
        for (int b = 0; b < 3; ++b)
            w[b] = packed_symbol(x, 2 - b) > 0 ? '+' : '-';
        std::printf("%s  empirical %.4f +- %.4f   exact %.4f\n", w, emp.frequency[x], emp.std_error[x], exact[x]);
    }
    std::printf("TV = %.4f\n", tv_distance(emp.frequency, exact));
}
