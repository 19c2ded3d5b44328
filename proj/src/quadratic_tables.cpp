// Coefficient tables for the stationary covariance closed forms.
// Each row {j, a, {c0, c1, ...}} contributes kappa^j (1-theta)^a sum_i c_i theta^i.

#include "sapd/quadratic.hpp"

namespace sapd::poly {

const PolyTable kTilde11a = {
    {2, 0, {0, 0, -4, -8, -4}},
    {4, 0, {1, 2, -1, -8, -9, 6, 1}},
    {6, 2, {0, 1, 4, 4, 0, -1}},
};

const PolyTable kTilde11b = {
    {2, 0, {0, 0, -4, -8, 4, 8, -8}},
    {4, 2, {1, 4, 4, -6, -11, 2, 2}},
    {6, 4, {0, 1, 4, 5, 2}},
};

const PolyTable kTilde12a = {
    {4, 0, {0, 0, -4, -8, 0, 4}},
    {6, 1, {1, 3, 1, -8, -11, 1, 1}},
    {8, 3, {0, 1, 4, 5, 2}},
};

const PolyTable kTilde12b = {
    {2, 0, {0, 0, 0, 0, 4, 8, 0, -4}},
    {4, 1, {0, 0, -5, -15, -5, 20, 11, -9, -1}},
    {6, 3, {1, 5, 8, -3, -21, -14, 2, 2}},
    {8, 5, {0, 1, 5, 9, 7, 2}},
};

const PolyTable kTilde22a = {
    {6, 0, {0, 0, -4, -8, 4, 8, -8}},
    {8, 2, {1, 4, 4, -6, -11, 2, 2}},
    {10, 4, {0, 1, 4, 5, 2}},
};

const PolyTable kTilde22b = {
    {2, 0, {0, 0, -4, -16, -20, 0, 16, 8}},
    {4, 0, {1, 4, 3, -20, -45, -2, 53, 20, -20, -2}},
    {6, 2, {0, 3, 14, 20, -8, -47, -30, 4, 4}},
    {8, 4, {0, 0, 2, 10, 18, 14, 4}},
};

const PolyTable kInf11a = {
    {2, 0, {0, 0, 0, 0, -4, -8, -4}},
    {4, 0, {0, 0, 1, 10, 7, -24, -17, 14, 1}},
    {6, 2, {0, -2, -10, -9, 24, 34, -10, -3}},
    {8, 4, {1, 4, 2, -14, -21, -2, 2}},
    {10, 6, {0, 1, 4, 5, 2}},
};

const PolyTable kInf11b = {
    {2, 0, {0, 0, -4, -8, 4, 8, -8}},
    {4, 2, {1, 4, 4, -6, -11, 2, 2}},
    {6, 4, {0, 1, 4, 5, 2}},
};

const PolyTable kInf12aPrinted = {
    {4, 0, {0, 0, 0, -4, -8, 0, 4}},
    {6, 1, {0, 1, 3, 5, 0, -15, -7, 9}},
    {8, 3, {0, -1, -3, 0, 11, 13, -2, -2}},
    {10, 5, {0, 0, -1, -4, -5, -2}},
};

const PolyTable kInf12bPrinted = {
    {2, 0, {0, 0, 0, 4, 12, 8, -12, -16, 4, 8}},
    {4, 1, {0, -1, -4, -8, 5, 40, 22, -42, -29, 19, 2}},
    {6, 3, {0, 1, 2, -6, -23, -13, 33, 32, -2, -4}},
    {8, 5, {0, 0, 1, 3, -1, -11, -12, -4}},
};

const PolyTable kInf12a = {
    {4, 0, {0, 0, 0, -4, -8, 0, 4}},
    {6, 1, {0, 1, 7, 9, -12, -19, 9, 1}},
    {8, 3, {-1, -4, -3, 10, 16, 0, -2}},
    {10, 5, {0, -1, -4, -5, -2}},
};

const PolyTable kInf12b = {
    {2, 0, {0, 0, 4, 12, 4, -16, -8, 8, 4}},
    {4, 1, {-1, -4, -3, 15, 30, -3, -33, -9, 11, 1}},
    {6, 3, {0, -2, -9, -12, 5, 26, 16, -2, -2}},
    {8, 5, {0, 0, -1, -5, -9, -7, -2}},
};

const PolyTable kCommon = {
    {2, 0, {0, 0, -4, -12, -12, -4}},
    {4, 0, {1, 3, 1, -17, -33, -3, 15, 1}},
    {6, 1, {0, 3, 14, 13, -24, -35, 10, 3}},
    {8, 3, {-1, -4, -2, 14, 21, 2, -2}},
    {10, 5, {0, -1, -4, -5, -2}},
};
}  // namespace sapd::poly
