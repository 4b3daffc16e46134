#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace liftcert
{
//! Malformed input; the message names the source and the offending field.
class InputError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! 17 significant digits, enough to round-trip any double.
std::string format_double(double x);

//! Row-major CSV, one matrix row per line. Each header line is written
//! after a leading '#'.
std::string matrix_to_csv(Eigen::MatrixXd const& a,
                          std::vector<std::string> const& header = {});

//! Parse CSV text; lines starting with '#' and blank lines are skipped.
Eigen::MatrixXd parse_csv_matrix(std::string const& text,
                                 std::string const& source);

Eigen::MatrixXd read_csv_matrix(std::string const& path);

std::string read_text_file(std::string const& path);
void write_text_file(std::string const& path, std::string const& text);

//! Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string const& data);

}  // namespace liftcert
