#pragma once

namespace coapids {

/// Selects the serial reference path or the OpenMP path of a kernel.
/// Both paths produce bit-identical results.
enum class Exec { serial, parallel };

/// Caps the OpenMP worker count; 0 leaves the runtime default.
void set_max_threads(int jobs);

}  // namespace coapids
