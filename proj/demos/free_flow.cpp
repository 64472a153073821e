// Split-step free flow of a Gaussian against the closed form.
// usage: demo_free_flow [steps]

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "ucont/evolution.hpp"

using namespace ucont;

int main(int argc, char** argv) {
    const int steps = argc > 1 ? std::atoi(argv[1]) : 200;
    Grid g = Grid::cube(1, 1024, 20);
    GaussianPacket p;
    p.s = {0.5, -0.5};
    PropagateOptions o;
    o.steps = steps;
    o.save_every = steps / 8 > 0 ? steps / 8 : 1;
    auto tr = propagate({0.0, g, p.sample(g)}, CoefficientField::identity(1), DissipationParams::schroedinger(), 1.0, o);
    std::printf("%8s %14s %14s\n", "t", "mass", "rel. error");
    for (std::size_t k = 0; k < tr.size(); ++k) {
        Field exact = free_flow_closed_form(p, tr.times[k]).sample(g);
        const double err = l2_distance(tr.frames[k], exact, g) / std::sqrt(mass(exact, g));
        std::printf("%8.4f %14.10f %14.3e\n", tr.times[k], mass(tr.frames[k], g), err);
    }
}
