#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace liftcert
{
//! Raised when a combinatorial size does not fit in std::size_t.
class SizeError : public std::overflow_error
{
  public:
    using std::overflow_error::overflow_error;
};

//! Binomial coefficient with overflow detection.
std::size_t binomial(std::size_t n, std::size_t k);

//! n^d with overflow detection.
std::size_t int_pow(std::size_t n, std::size_t d);

//! d! with overflow detection.
std::size_t factorial(std::size_t d);

//! Number of non-decreasing d-tuples over [n], C(n+d-1, d).
std::size_t sym_dim(std::size_t n, std::size_t d);

//---------------------------------------------------------------------------//
/*!
 * \brief Non-decreasing tuple of indices into [0, n).
 *
 * Entries are 0-based in memory. Serialized forms (JSON column orders) use
 * 1-based entries.
 */
struct MultiIndex
{
    std::vector<int> entries;
    int n = 0;

    std::size_t order() const { return entries.size(); }

    //! Position in the lexicographic enumeration (0-based).
    std::size_t rank() const;

    //! Number of distinct orderings, d! / prod(t_i!).
    std::size_t orderings() const;

    //! prod(t_i!) over repeated values.
    std::size_t stabilizer() const;

    //! Row-major flat index in [n]^d, mode 1 slowest.
    std::size_t flat() const;

    //! Multiset union, entries re-sorted.
    MultiIndex merged(MultiIndex const& other) const;

    //! 1-based display, e.g. "(1,2)".
    std::string str() const;

    bool operator==(MultiIndex const&) const = default;

    //! Validate invariants; throws std::invalid_argument.
    void check() const;
};

//! All MultiIndex values of order d over [n], lexicographically sorted.
std::vector<MultiIndex> enumerate_multi_indices(int n, int d);

//! Sort an arbitrary tuple into a MultiIndex.
MultiIndex make_multi_index(std::vector<int> entries, int n);

//! Decode a row-major flat index into its d digits.
std::vector<int> unflatten(std::size_t flat, int n, int d);

//! Row-major flat index of an arbitrary tuple.
std::size_t flatten(std::vector<int> const& digits, int n);

}  // namespace liftcert
