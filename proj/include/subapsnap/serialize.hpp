#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "subapsnap/online.hpp"

namespace subapsnap {

// CBOR artifacts for the split offline/online workflow. Matrices are stored
// as little-endian float64 byte strings; the scalar field is recorded and
// checked on load.

using Bytes = std::vector<std::uint8_t>;

template <class Scalar>
Bytes encode_basis(const SnapshotBasis<Scalar>& basis);
template <class Scalar>
SnapshotBasis<Scalar> decode_basis(const Bytes& bytes);

Bytes encode_selectors(const std::vector<RowSelector>& selectors);
std::vector<RowSelector> decode_selectors(const Bytes& bytes);

/// Blocks, S Q and the output projection. The system and basis are not
/// stored; they are supplied again on load and checked against the shapes.
template <class Scalar>
Bytes encode_plans(const PlanSet<Scalar>& plans);
template <class Scalar>
PlanSet<Scalar> decode_plans(const Bytes& bytes, SystemPtr<Scalar> system, BasisPtr<Scalar> basis);

void write_bytes(const std::filesystem::path& path, const Bytes& bytes);
Bytes read_bytes(const std::filesystem::path& path);

}  // namespace subapsnap
