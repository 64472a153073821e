// Smallest Carleman slack over a few random annulus samples at the
// threshold beta, for a handful of radii.
// usage: demo_carleman_slack [samples]

#include <cstdio>
#include <cstdlib>

#include "ucont/carleman.hpp"

using namespace ucont;

int main(int argc, char** argv) {
    SweepConfig s;
    s.R_values = {1, 2, 4, 8};
    s.samples = argc > 1 ? std::atoi(argv[1]) : 10;
    s.nt = 128;
    s.nx = 256;
    auto r = carleman_sweep(s);
    std::printf("phi'' sup %.6f, failures %zu, smallest slack %.3f\n", r.phi2_sup, r.failures, r.min_slack);
    std::fputs(r.csv().str().c_str(), stdout);
}
