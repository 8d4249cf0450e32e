#pragma once

#include <filesystem>
#include <iosfwd>

#include "pxem/robit_model.hpp"

namespace pxem {

/// Reads a robit dataset from CSV. Lines starting with '#' are comments.
///
/// Two layouts are accepted, chosen by the header row:
///   y,x1,...,xp       used as-is; an intercept must be a column of ones
///   volume,rate,y     raw vaso-constriction layout, transformed to the
///                     design (1, ln volume, ln rate)
///
/// Throws DataError on malformed input and RankDeficientError when the
/// design lacks full column rank.
RobitData read_robit_csv(std::istream& in, Dof nu);
RobitData load_robit_csv(const std::filesystem::path& path, Dof nu);

/// Design row (1, ln volume, ln rate) for the raw layout.
Eigen::RowVector3d vaso_design_row(double volume, double rate);

}  // namespace pxem
