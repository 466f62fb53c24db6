#ifndef RELSIFTER_EXEC_HPP
#define RELSIFTER_EXEC_HPP

namespace relsifter {

// Execution policy for the data-parallel kernels. Serial is the reference
// path; parallel must produce identical results (tests compare both, the
// bench tool compares their runtimes).
enum class Exec { serial, parallel };

}  // namespace relsifter

#endif
