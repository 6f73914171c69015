#pragma once

#include <string>

#include "fracshape/driver.hpp"

namespace fracshape {

// Self-checks behind `verify --check ...`. Each prints a small report to
// stdout and returns true on success. `out_dir` receives CSV dumps.
bool verify_spectral(unsigned seed, const std::string& out_dir);
bool verify_adjoint(unsigned seed);
bool verify_shape(unsigned seed);
bool verify_deformation(unsigned seed);

}  // namespace fracshape
