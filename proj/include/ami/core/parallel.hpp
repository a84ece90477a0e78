#pragma once

namespace ami {

// Reads AMI_THREADS once and applies it to the OpenMP runtime. Unset or
// invalid values leave the runtime default in place.
void configure_threads_from_env();

int max_threads();
bool in_parallel();

}  // namespace ami
