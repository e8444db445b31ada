// Fine-Euler discrete-minimum survival for GBM, written without the library.
// Run once; its output is frozen in frozen_constants.hpp.
//
//   brute_force_survival [steps=2000] [trials=1000000] [seed=20240601]

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>

int main(int argc, char** argv) {
    const long steps = argc > 1 ? std::atol(argv[1]) : 2000;
    const long trials = argc > 2 ? std::atol(argv[2]) : 1000000;
    const unsigned long long seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 20240601ULL;

    const double x0 = 86.3, a = 76.0, mu = 0.03, sigma = 0.05, horizon = 1.0;
    const double dt = horizon / static_cast<double>(steps), sq = std::sqrt(dt);

    std::mt19937_64 gen(seed);
    std::normal_distribution<double> z;
    long survived = 0;
    for (long j = 0; j < trials; ++j) {
        double v = x0;
        bool alive = true;
        for (long k = 0; k < steps; ++k) {
            v += mu * v * dt + sigma * v * sq * z(gen);
            if (v <= a) {
                alive = false;
                // Keep the generator in lockstep so the stream position does not depend on outcomes.
                for (long r = k + 1; r < steps; ++r) z(gen);
                break;
            }
        }
        survived += alive;
    }
    const double p = static_cast<double>(survived) / static_cast<double>(trials);
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(trials - 1));
    std::printf("steps=%ld trials=%ld seed=%llu survived=%ld value=%.17g stderr=%.17g\n", steps, trials,
                seed, survived, p, se);
    return 0;
}
