#include "liftcert/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

namespace liftcert
{
std::string format_double(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string matrix_to_csv(Eigen::MatrixXd const& a,
                          std::vector<std::string> const& header)
{
    std::string out;
    for (auto const& h : header)
        out += "# " + h + "\n";
    for (Eigen::Index i = 0; i < a.rows(); ++i)
    {
        for (Eigen::Index j = 0; j < a.cols(); ++j)
        {
            if (j)
                out += ',';
            out += format_double(a(i, j));
        }
        out += '\n';
    }
    return out;
}

Eigen::MatrixXd parse_csv_matrix(std::string const& text,
                                 std::string const& source)
{
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#')
            continue;
        std::vector<double> row;
        std::size_t field = 0;
        std::size_t pos = 0;
        while (true)
        {
            ++field;
            auto comma = line.find(',', pos);
            std::string cell = line.substr(pos, comma == std::string::npos
                                                    ? std::string::npos
                                                    : comma - pos);
            auto b = cell.find_first_not_of(" \t");
            auto e = cell.find_last_not_of(" \t");
            cell = b == std::string::npos ? "" : cell.substr(b, e - b + 1);
            char* end = nullptr;
            errno = 0;
            double v = std::strtod(cell.c_str(), &end);
            if (cell.empty() || *end != '\0' || errno == ERANGE
                || !std::isfinite(v))
            {
                throw InputError(source + ": line " + std::to_string(lineno)
                                 + " field " + std::to_string(field)
                                 + ": cannot parse '" + cell
                                 + "' as a finite number");
            }
            row.push_back(v);
            if (comma == std::string::npos)
                break;
            pos = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw InputError(source + ": line " + std::to_string(lineno)
                             + ": expected " + std::to_string(rows.front().size())
                             + " fields, found " + std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw InputError(source + ": no data rows");
    Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))
                = rows[i][j];
    return a;
}

std::string read_text_file(std::string const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Eigen::MatrixXd read_csv_matrix(std::string const& path)
{
    return parse_csv_matrix(read_text_file(path), path);
}

void write_text_file(std::string const& path, std::string const& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error(path + ": cannot open for writing");
    out << text;
    if (!out)
        throw std::runtime_error(path + ": write failed");
}

std::string sha256_hex(std::string const& data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(),
                   nullptr)
        != 1)
        throw std::runtime_error("sha256 failed");
    static char const* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i)
    {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

}  // namespace liftcert
