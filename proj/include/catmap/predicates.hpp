#pragma once

#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>

#include "catmap/point.hpp"

namespace catmap::predicates {

// Floating-point evaluation with a static error bound (Shewchuk's stage-A
// bounds); if the result is within the bound the sign is recomputed exactly
// with rationals, which represent every double exactly.

namespace detail {

using exact = boost::multiprecision::cpp_rational;

inline int sign(const exact& v) { return v.sign(); }

inline int orient_exact(Point2 a, Point2 b, Point2 c) {
    exact acx = exact(a.x) - exact(c.x), bcx = exact(b.x) - exact(c.x);
    exact acy = exact(a.y) - exact(c.y), bcy = exact(b.y) - exact(c.y);
    return sign(acx * bcy - acy * bcx);
}

inline int incircle_exact(Point2 a, Point2 b, Point2 c, Point2 d) {
    exact adx = exact(a.x) - exact(d.x), ady = exact(a.y) - exact(d.y);
    exact bdx = exact(b.x) - exact(d.x), bdy = exact(b.y) - exact(d.y);
    exact cdx = exact(c.x) - exact(d.x), cdy = exact(c.y) - exact(d.y);
    exact alift = adx * adx + ady * ady;
    exact blift = bdx * bdx + bdy * bdy;
    exact clift = cdx * cdx + cdy * cdy;
    exact det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
                clift * (adx * bdy - bdx * ady);
    return sign(det);
}

}  // namespace detail

/// +1 if a, b, c turn counter-clockwise, -1 if clockwise, 0 if collinear.
inline int orient(Point2 a, Point2 b, Point2 c) {
    const double left = (a.x - c.x) * (b.y - c.y);
    const double right = (a.y - c.y) * (b.x - c.x);
    const double det = left - right;
    const double bound = 3.3306690738754716e-16 * (std::abs(left) + std::abs(right));
    if (det > bound) return 1;
    if (-det > bound) return -1;
    return detail::orient_exact(a, b, c);
}

/// For counter-clockwise a, b, c: +1 if d lies strictly inside their
/// circumcircle, -1 if strictly outside, 0 if on it.
inline int incircle(Point2 a, Point2 b, Point2 c, Point2 d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
    const double cdxady = cdx * ady, adxcdy = adx * cdy;
    const double adxbdy = adx * bdy, bdxady = bdx * ady;
    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;
    const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
    const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                             (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                             (std::abs(adxbdy) + std::abs(bdxady)) * clift;
    const double bound = 1.1102230246251577e-15 * permanent;
    if (det > bound) return 1;
    if (-det > bound) return -1;
    return detail::incircle_exact(a, b, c, d);
}

}  // namespace catmap::predicates
