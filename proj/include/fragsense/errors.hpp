#pragma once

#include <stdexcept>
#include <string>

namespace fragsense {

// Data-level failures (bad files, bad inputs): CLI exit code 2.
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct parse_error : data_error {
  parse_error(const std::string& file, long line, const std::string& what)
      : data_error(file + ":" + std::to_string(line) + ": " + what),
        line_number(line) {}
  long line_number;
};

struct schema_error : data_error {
  using data_error::data_error;
};

// Violated mathematical precondition (negative size, cutoff past Nyquist...).
struct domain_error : data_error {
  using data_error::data_error;
};

// Window or band outside the extent of the data it addresses.
struct range_error : data_error {
  using data_error::data_error;
};

// Channels that must share rate/length do not.
struct alignment_error : data_error {
  using data_error::data_error;
};

struct insufficient_data_error : data_error {
  using data_error::data_error;
};

// Jerk threshold never crossed: trial contains no detectable excavation.
struct no_excavation_error : data_error {
  using data_error::data_error;
};

// Feature/calibration scope mismatch (source, epoch, pile).
struct scope_error : data_error {
  using data_error::data_error;
};

struct degenerate_reference_error : data_error {
  using data_error::data_error;
};

// User-level misconfiguration: CLI exit code 1.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fragsense
