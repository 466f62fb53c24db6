#ifndef RELSIFTER_ERRORS_HPP
#define RELSIFTER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace relsifter {

// Unreadable or unwritable files.
struct io_error : std::runtime_error {
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input that does not match the declared format (wrong --format flag,
// corrupt snapshot, bad TSV layout).
struct format_error : std::runtime_error {
  explicit format_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration (bad config file, folds > rows, empty grid).
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A caller broke an API precondition (dimension mismatch, unknown object,
// inconsistent stats). These indicate bugs, not bad user input.
struct contract_error : std::logic_error {
  explicit contract_error(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace relsifter

#endif
