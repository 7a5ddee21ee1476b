#pragma once

#include "psot/measure.hpp"

namespace psot {

// 8-bit RGB image.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<unsigned char> rgb;  // row-major, 3 bytes per pixel

    int pixels() const { return width * height; }
};

// PNG or PPM (P3/P6), dispatched on file extension / magic. Throws IOError.
Image read_image(const std::string& path);
void write_image(const std::string& path, const Image& img);

// Pixel colours as a point cloud in [0,1]^3 with uniform weights.
DiscreteMeasure image_to_measure(const Image& img);
// Replace the colours of img by the rows of colors (clamped to [0,1]).
Image measure_to_image(const Image& img, const Mat& colors);

enum class TransferMethod { MIN_PS_PERM, ES_BARYCENTRIC, SW_FLOW };

struct TransferOptions {
    int num_directions = 50;   // direction budget for MIN_PS_PERM / ES
    std::uint64_t seed = 0;
    int sw_steps = 10;         // SW_FLOW
    double sw_lr = 1.0;
    int sw_batch = 3;          // orthonormal directions per SW step
};

// Recolours source with the target palette.
Image color_transfer(const Image& source, const Image& target,
                     TransferMethod method, const TransferOptions& opts = {});

struct RigidTransform {
    Mat R;  // d x d rotation, det +1
    Vec t;  // d
    Mat apply(const Mat& X) const { return (X * R.transpose()).rowwise() + t.transpose(); }
};

// Weighted least-squares rotation + translation mapping X onto Y
// (rows paired by the plan; Kabsch / SVD solve).
RigidTransform procrustes(const Mat& X, const Mat& Y, const SparsePlan& plan);

enum class Correspondence { NN, MIN_PS, W2 };

struct ICPOptions {
    Correspondence correspondence = Correspondence::MIN_PS;
    int max_iters = 50;
    double tol = 1e-9;         // stop when the transform update is below tol
    int num_directions = 50;   // MIN_PS budget
    std::uint64_t seed = 0;
};

struct ICPResult {
    RigidTransform transform;
    double rmse = 0.0;  // sqrt of the matched mean squared residual
    int iters = 0;
};

// Rigid registration of the source cloud onto the target cloud. The W2
// correspondence inherits the exact-solver size guard.
ICPResult icp_register(const Mat& source, const Mat& target, const ICPOptions& opts = {});

}  // namespace psot
