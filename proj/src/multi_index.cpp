#include "liftcert/multi_index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

namespace liftcert
{
namespace
{
constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();

std::size_t checked_mul(std::size_t a, std::size_t b)
{
    if (a != 0 && b > kMax / a)
        throw SizeError("combinatorial size overflows std::size_t");
    return a * b;
}
}  // namespace

std::size_t binomial(std::size_t n, std::size_t k)
{
    if (k > n)
        return 0;
    k = std::min(k, n - k);
    std::size_t result = 1;
    for (std::size_t i = 1; i <= k; ++i)
    {
        // result * (n - k + i) / i is exact at every step; divide by the gcd
        // first so the intermediate product stays small
        std::size_t num = n - k + i;
        std::size_t g = std::gcd(result, i);
        std::size_t r = result / g;
        std::size_t q = i / g;
        result = checked_mul(r, num / q);
    }
    return result;
}

std::size_t int_pow(std::size_t n, std::size_t d)
{
    std::size_t r = 1;
    for (std::size_t i = 0; i < d; ++i)
        r = checked_mul(r, n);
    return r;
}

std::size_t factorial(std::size_t d)
{
    std::size_t r = 1;
    for (std::size_t i = 2; i <= d; ++i)
        r = checked_mul(r, i);
    return r;
}

std::size_t sym_dim(std::size_t n, std::size_t d)
{
    if (n == 0)
        return d == 0 ? 1 : 0;
    if (d == 0)
        return 1;
    if (n + d - 1 < n)
        throw SizeError("combinatorial size overflows std::size_t");
    return binomial(n + d - 1, d);
}

std::size_t MultiIndex::rank() const
{
    // count tuples that are lexicographically smaller
    std::size_t d = entries.size();
    std::size_t r = 0;
    int prev = 0;
    for (std::size_t j = 0; j < d; ++j)
    {
        std::size_t rest = d - j - 1;
        for (int v = prev; v < entries[j]; ++v)
            r += sym_dim(static_cast<std::size_t>(n - v), rest);
        prev = entries[j];
    }
    return r;
}

std::size_t MultiIndex::stabilizer() const
{
    std::size_t s = 1;
    std::size_t run = 1;
    for (std::size_t j = 1; j <= entries.size(); ++j)
    {
        if (j < entries.size() && entries[j] == entries[j - 1])
        {
            ++run;
            continue;
        }
        s *= factorial(run);
        run = 1;
    }
    return s;
}

std::size_t MultiIndex::orderings() const
{
    return factorial(entries.size()) / stabilizer();
}

std::size_t MultiIndex::flat() const
{
    return flatten(entries, n);
}

MultiIndex MultiIndex::merged(MultiIndex const& other) const
{
    std::vector<int> e = entries;
    e.insert(e.end(), other.entries.begin(), other.entries.end());
    return make_multi_index(std::move(e), std::max(n, other.n));
}

std::string MultiIndex::str() const
{
    std::ostringstream os;
    os << '(';
    for (std::size_t j = 0; j < entries.size(); ++j)
        os << (j ? "," : "") << entries[j] + 1;
    os << ')';
    return os.str();
}

void MultiIndex::check() const
{
    for (std::size_t j = 0; j < entries.size(); ++j)
    {
        if (entries[j] < 0 || entries[j] >= n)
            throw std::invalid_argument("MultiIndex entry out of range");
        if (j + 1 < entries.size() && entries[j] > entries[j + 1])
            throw std::invalid_argument("MultiIndex entries not sorted");
    }
}

std::vector<MultiIndex> enumerate_multi_indices(int n, int d)
{
    if (n < 1 || d < 1)
        throw std::invalid_argument("enumerate_multi_indices needs n, d >= 1");
    std::size_t count = sym_dim(static_cast<std::size_t>(n),
                                static_cast<std::size_t>(d));
    std::vector<MultiIndex> out;
    out.reserve(count);
    std::vector<int> cur(static_cast<std::size_t>(d), 0);
    while (true)
    {
        out.push_back(MultiIndex{cur, n});
        // advance the rightmost entry that can grow, reset the tail to it
        int j = d - 1;
        while (j >= 0 && cur[static_cast<std::size_t>(j)] == n - 1)
            --j;
        if (j < 0)
            break;
        int v = ++cur[static_cast<std::size_t>(j)];
        for (int t = j + 1; t < d; ++t)
            cur[static_cast<std::size_t>(t)] = v;
    }
    return out;
}

MultiIndex make_multi_index(std::vector<int> entries, int n)
{
    std::sort(entries.begin(), entries.end());
    MultiIndex m{std::move(entries), n};
    m.check();
    return m;
}

std::vector<int> unflatten(std::size_t flat, int n, int d)
{
    std::vector<int> digits(static_cast<std::size_t>(d));
    auto un = static_cast<std::size_t>(n);
    for (int j = d - 1; j >= 0; --j)
    {
        digits[static_cast<std::size_t>(j)] = static_cast<int>(flat % un);
        flat /= un;
    }
    return digits;
}

std::size_t flatten(std::vector<int> const& digits, int n)
{
    std::size_t f = 0;
    for (int v : digits)
        f = f * static_cast<std::size_t>(n) + static_cast<std::size_t>(v);
    return f;
}

}  // namespace liftcert
