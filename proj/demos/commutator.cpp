// Conjugate the Schroedinger operator by a weight and print the pieces.
// usage: demo_commutator [beta]

#include <cstdlib>
#include <iostream>

#include "ucont/operators.hpp"

using namespace ucont;

int main(int argc, char** argv) {
    const double beta = argc > 1 ? std::atof(argv[1]) : 1.0;
    auto d = conjugate_decompose(CoefficientField::identity(2), WeightSpec::quadratic(beta));
    std::cout << "phi = " << d.phi.to_string() << "\n\n";
    std::cout << "S:\n" << d.S.to_text() << "\nA:\n" << d.A.to_text() << "\n";
    std::cout << "[S,A]:\n" << commutator(d.S, d.A).to_text();
}
