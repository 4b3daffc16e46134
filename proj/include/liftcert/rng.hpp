#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

namespace liftcert
{
//---------------------------------------------------------------------------//
/*!
 * \brief SplitMix64 finalizer.
 *
 * Used both as the output function of the counter stream and to hash stream
 * keys together.
 */
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

//! FNV-1a hash of a role name, so roles can be spelled as strings.
constexpr std::uint64_t role_tag(std::string_view name)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : name)
    {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

//! Combine two keys; order matters.
constexpr std::uint64_t combine_keys(std::uint64_t a, std::uint64_t b)
{
    return mix64(a ^ mix64(b + 0x632be59bd9b4e019ull));
}

//---------------------------------------------------------------------------//
/*!
 * \brief Counter-based random stream.
 *
 * The i-th draw is a pure function of (key, i), so a stream keyed by
 * (master seed, trial, role) gives the same numbers regardless of which
 * thread runs the trial or in which order trials finish. Normals use the
 * Box-Muller transform; both outputs of each pair are consumed.
 */
class Stream
{
  public:
    explicit Stream(std::uint64_t key) : key_(key) {}
    Stream(std::uint64_t seed, std::uint64_t trial, std::uint64_t role)
        : key_(combine_keys(combine_keys(seed, trial), role))
    {
    }
    Stream(std::uint64_t seed, std::uint64_t trial, std::string_view role)
        : Stream(seed, trial, role_tag(role))
    {
    }

    std::uint64_t key() const { return key_; }

    //! Independent sub-stream; does not advance this stream.
    Stream child(std::uint64_t tag) const
    {
        return Stream(combine_keys(key_, tag));
    }
    Stream child(std::string_view tag) const { return child(role_tag(tag)); }

    std::uint64_t next_u64();

    //! Uniform on [0, 1) with 53 random bits.
    double uniform();

    //! Standard normal.
    double normal();

    //! Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    //! Matrix of i.i.d. N(0, stddev^2), filled column by column.
    Eigen::MatrixXd gaussian(Eigen::Index rows,
                             Eigen::Index cols,
                             double stddev = 1.0);

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

//! Per-trial seed recorded in reports.
inline std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial)
{
    return combine_keys(master_seed, trial);
}

}  // namespace liftcert
