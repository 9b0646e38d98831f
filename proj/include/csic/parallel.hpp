#pragma once

namespace csic {

// Process-wide switch forcing single-threaded execution (CLI --serial).
// Results do not depend on it beyond the documented tolerances; it exists for
// byte-exact comparisons across runs.
void set_serial(bool serial);
bool is_serial();

}  // namespace csic
