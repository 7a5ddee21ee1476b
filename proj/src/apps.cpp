#include "psot/apps.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include <png.h>

#include "psot/exact.hpp"
#include "psot/expected.hpp"
#include "psot/ot1d.hpp"
#include "psot/pivot.hpp"

namespace psot {

// --- image I/O --------------------------------------------------------------

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    if (s.size() < suffix.size()) return false;
    std::string tail = s.substr(s.size() - suffix.size());
    std::transform(tail.begin(), tail.end(), tail.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return tail == suffix;
}

Image read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IOError("cannot open " + path);
    std::string magic;
    in >> magic;
    if (magic != "P6" && magic != "P3") throw IOError(path + ": not a PPM file");
    auto next_int = [&]() {
        int v;
        // skip whitespace and '#' comments
        for (;;) {
            int c = in.peek();
            if (c == '#') {
                std::string line;
                std::getline(in, line);
            } else if (std::isspace(c)) {
                in.get();
            } else {
                break;
            }
        }
        if (!(in >> v)) throw IOError(path + ": truncated PPM header");
        return v;
    };
    Image img;
    img.width = next_int();
    img.height = next_int();
    int maxval = next_int();
    if (img.width <= 0 || img.height <= 0 || maxval <= 0 || maxval > 255)
        throw IOError(path + ": unsupported PPM geometry");
    size_t bytes = static_cast<size_t>(img.width) * img.height * 3;
    img.rgb.resize(bytes);
    if (magic == "P6") {
        in.get();  // single whitespace after maxval
        in.read(reinterpret_cast<char*>(img.rgb.data()), static_cast<std::streamsize>(bytes));
        if (static_cast<size_t>(in.gcount()) != bytes) throw IOError(path + ": truncated PPM data");
    } else {
        for (size_t k = 0; k < bytes; ++k) {
            int v;
            if (!(in >> v)) throw IOError(path + ": truncated PPM data");
            img.rgb[k] = static_cast<unsigned char>(std::clamp(v, 0, maxval));
        }
    }
    return img;
}

void write_ppm(const std::string& path, const Image& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IOError("cannot write " + path);
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.rgb.data()),
              static_cast<std::streamsize>(img.rgb.size()));
    if (!out) throw IOError("write failed: " + path);
}

Image read_png(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw IOError("cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IOError(path + ": libpng init failed");
    }
    Image img;
    std::vector<png_bytep> row_ptrs;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IOError(path + ": PNG decode failed");
    }
    png_init_io(png, fp);
    png_read_info(png, info);
    png_set_expand(png);            // palette/gray/low-depth -> 8-bit
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.rgb.resize(static_cast<size_t>(img.width) * img.height * 3);
    row_ptrs.resize(img.height);
    for (int y = 0; y < img.height; ++y)
        row_ptrs[y] = img.rgb.data() + static_cast<size_t>(y) * img.width * 3;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return img;
}

void write_png(const std::string& path, const Image& img) {
    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw IOError("cannot write " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IOError(path + ": libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IOError(path + ": PNG encode failed");
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y)
        png_write_row(png, const_cast<png_bytep>(
                               img.rgb.data() + static_cast<size_t>(y) * img.width * 3));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

}  // namespace

Image read_image(const std::string& path) {
    if (ends_with(path, ".ppm")) return read_ppm(path);
    if (ends_with(path, ".png")) return read_png(path);
    // sniff the magic bytes
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IOError("cannot open " + path);
    char magic[2] = {0, 0};
    in.read(magic, 2);
    in.close();
    if (magic[0] == 'P' && (magic[1] == '3' || magic[1] == '6')) return read_ppm(path);
    return read_png(path);
}

void write_image(const std::string& path, const Image& img) {
    if (img.width <= 0 || img.height <= 0 ||
        img.rgb.size() != static_cast<size_t>(img.width) * img.height * 3)
        throw std::invalid_argument("write_image: malformed image");
    if (ends_with(path, ".png"))
        write_png(path, img);
    else
        write_ppm(path, img);
}

DiscreteMeasure image_to_measure(const Image& img) {
    const int n = img.pixels();
    Mat pts(n, 3);
    for (int p = 0; p < n; ++p)
        for (int c = 0; c < 3; ++c)
            pts(p, c) = img.rgb[static_cast<size_t>(p) * 3 + c] / 255.0;
    return DiscreteMeasure::uniform(std::move(pts));
}

Image measure_to_image(const Image& img, const Mat& colors) {
    if (colors.rows() != img.pixels() || colors.cols() != 3)
        throw std::invalid_argument("measure_to_image: shape mismatch");
    Image out = img;
    for (int p = 0; p < img.pixels(); ++p)
        for (int c = 0; c < 3; ++c) {
            double v = std::clamp(colors(p, c), 0.0, 1.0);
            out.rgb[static_cast<size_t>(p) * 3 + c] =
                static_cast<unsigned char>(std::lround(v * 255.0));
        }
    return out;
}

// --- colour transfer --------------------------------------------------------

namespace {

// Sorted-order matching cost along th; ties broken by index, which gives an
// upper bound on PS and is what the pixel assignment uses anyway.
double direction_cost(const Mat& X, const Mat& Y, const Vec& th,
                      std::vector<int>& sx, std::vector<int>& sy) {
    Vec px = X * th, py = Y * th;
    std::iota(sx.begin(), sx.end(), 0);
    std::iota(sy.begin(), sy.end(), 0);
    std::sort(sx.begin(), sx.end(), [&](int a, int b) { return px[a] < px[b]; });
    std::sort(sy.begin(), sy.end(), [&](int a, int b) { return py[a] < py[b]; });
    if (X.rows() == Y.rows()) {
        double c = 0.0;
        for (int k = 0; k < X.rows(); ++k)
            c += (X.row(sx[k]) - Y.row(sy[k])).squaredNorm();
        return c / static_cast<double>(X.rows());
    }
    // unequal sizes: cost of the quantile coupling
    double c = 0.0;
    Vec a = Vec::Constant(X.rows(), 1.0 / X.rows());
    Vec b = Vec::Constant(Y.rows(), 1.0 / Y.rows());
    Coupling1D cpl = quantile_coupling(px, a, py, b);
    for (const auto& e : cpl.entries)
        c += e.mass * (X.row(e.i) - Y.row(e.j)).squaredNorm();
    return c;
}

Mat transfer_min_ps(const Mat& X, const Mat& Y, const TransferOptions& opts) {
    std::mt19937_64 rng(opts.seed);
    auto dirs = sample_sphere(opts.num_directions, 3, rng);
    std::vector<int> sx(X.rows()), sy(Y.rows());
    double best = std::numeric_limits<double>::infinity();
    Vec best_th;
    for (const auto& th : dirs) {
        double c = direction_cost(X, Y, th, sx, sy);
        if (c < best) {
            best = c;
            best_th = th;
        }
    }
    Vec px = X * best_th, py = Y * best_th;
    std::iota(sx.begin(), sx.end(), 0);
    std::iota(sy.begin(), sy.end(), 0);
    std::sort(sx.begin(), sx.end(), [&](int a, int b) { return px[a] < px[b]; });
    std::sort(sy.begin(), sy.end(), [&](int a, int b) { return py[a] < py[b]; });
    Mat out(X.rows(), 3);
    if (X.rows() == Y.rows()) {
        // exact palette permutation
        for (int k = 0; k < X.rows(); ++k) out.row(sx[k]) = Y.row(sy[k]);
        return out;
    }
    Vec a = Vec::Constant(X.rows(), 1.0 / X.rows());
    Vec b = Vec::Constant(Y.rows(), 1.0 / Y.rows());
    Coupling1D cpl = quantile_coupling(px, a, py, b);
    out.setZero();
    Vec mass = Vec::Zero(X.rows());
    for (const auto& e : cpl.entries) {
        out.row(e.i) += e.mass * Y.row(e.j);
        mass[e.i] += e.mass;
    }
    for (int i = 0; i < X.rows(); ++i) out.row(i) /= mass[i];
    return out;
}

// Streaming per-direction barycentric map of the lifted plan: inside a tie
// block the conditional mean is the block mean of the target colours.
Mat lifted_barycentric(const Mat& X, const Mat& Y, const Vec& th) {
    const int n = static_cast<int>(X.rows()), m = static_cast<int>(Y.rows());
    Vec px = X * th, py = Y * th;
    Vec all(n + m);
    all << px, py;
    double tol = default_tie_tol(all);
    TieGroups gx = tie_groups(px, tol);
    TieGroups gy = tie_groups(py, tol);
    Vec A = Vec::Zero(gx.num_groups()), B = Vec::Zero(gy.num_groups());
    for (int i = 0; i < n; ++i) A[gx.group_of[i]] += 1.0 / n;
    for (int j = 0; j < m; ++j) B[gy.group_of[j]] += 1.0 / m;
    Mat ymean = Mat::Zero(gy.num_groups(), 3);
    for (int j = 0; j < m; ++j)
        ymean.row(gy.group_of[j]) += (1.0 / m) * Y.row(j);
    for (int g = 0; g < gy.num_groups(); ++g) ymean.row(g) /= B[g];

    Coupling1D blocks = quantile_coupling(gx.group_value, A, gy.group_value, B);
    Mat bary = Mat::Zero(n, 3);
    for (const auto& e : blocks.entries) {
        auto [xb, xe] = gx.spans[e.i];
        double frac = e.mass / A[e.i];
        for (int p = xb; p < xe; ++p)
            bary.row(gx.order[p]) += frac * ymean.row(e.j);
    }
    return bary;
}

Mat transfer_es(const Mat& X, const Mat& Y, const TransferOptions& opts) {
    std::mt19937_64 rng(opts.seed);
    auto dirs = sample_sphere(opts.num_directions, 3, rng);
    Mat bary = Mat::Zero(X.rows(), 3);
    for (const auto& th : dirs) bary += lifted_barycentric(X, Y, th);
    return bary / static_cast<double>(dirs.size());
}

Mat transfer_sw(Mat X, const Mat& Y, const TransferOptions& opts) {
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int n = static_cast<int>(X.rows()), m = static_cast<int>(Y.rows());
    Vec a = Vec::Constant(n, 1.0 / n), b = Vec::Constant(m, 1.0 / m);
    for (int step = 0; step < opts.sw_steps; ++step) {
        Mat G(3, opts.sw_batch);
        for (int c = 0; c < G.size(); ++c) G.data()[c] = gauss(rng);
        Eigen::HouseholderQR<Mat> qr(G);
        Mat Q = qr.householderQ() * Mat::Identity(3, opts.sw_batch);
        Mat grad = Mat::Zero(n, 3);
        for (int c = 0; c < opts.sw_batch; ++c) {
            Vec th = Q.col(c);
            Vec px = X * th, py = Y * th;
            Coupling1D cpl = quantile_coupling(px, a, py, b);
            for (const auto& e : cpl.entries)
                grad.row(e.i) += (2.0 * e.mass * n / opts.sw_batch) *
                                 (px[e.i] - py[e.j]) * th.transpose();
        }
        X -= opts.sw_lr * grad;
    }
    return X;
}

}  // namespace

Image color_transfer(const Image& source, const Image& target,
                     TransferMethod method, const TransferOptions& opts) {
    DiscreteMeasure src = image_to_measure(source);
    DiscreteMeasure tgt = image_to_measure(target);
    Mat colors;
    switch (method) {
        case TransferMethod::MIN_PS_PERM:
            colors = transfer_min_ps(src.points, tgt.points, opts);
            break;
        case TransferMethod::ES_BARYCENTRIC:
            colors = transfer_es(src.points, tgt.points, opts);
            break;
        case TransferMethod::SW_FLOW:
            colors = transfer_sw(src.points, tgt.points, opts);
            break;
    }
    return measure_to_image(source, colors);
}

// --- rigid registration -----------------------------------------------------

RigidTransform procrustes(const Mat& X, const Mat& Y, const SparsePlan& plan) {
    const int d = static_cast<int>(X.cols());
    double W = 0.0;
    Vec xbar = Vec::Zero(d), ybar = Vec::Zero(d);
    for (const auto& e : plan.entries) {
        W += e.mass;
        xbar += e.mass * X.row(e.i).transpose();
        ybar += e.mass * Y.row(e.j).transpose();
    }
    if (W <= 0.0) throw std::invalid_argument("procrustes: empty plan");
    xbar /= W;
    ybar /= W;
    Mat H = Mat::Zero(d, d);
    for (const auto& e : plan.entries)
        H += e.mass * (X.row(e.i).transpose() - xbar) * (Y.row(e.j) - ybar.transpose());
    Eigen::JacobiSVD<Mat> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat U = svd.matrixU(), V = svd.matrixV();
    Mat D = Mat::Identity(d, d);
    D(d - 1, d - 1) = ((V * U.transpose()).determinant() < 0.0) ? -1.0 : 1.0;
    RigidTransform T;
    T.R = V * D * U.transpose();
    T.t = ybar - T.R * xbar;
    return T;
}

namespace {

SparsePlan nn_plan(const Mat& X, const Mat& Y) {
    SparsePlan plan;
    plan.rows = static_cast<int>(X.rows());
    plan.cols = static_cast<int>(Y.rows());
    const double mass = 1.0 / X.rows();
    for (int i = 0; i < X.rows(); ++i) {
        int best = 0;
        double bd = (X.row(i) - Y.row(0)).squaredNorm();
        for (int j = 1; j < Y.rows(); ++j) {
            double dd = (X.row(i) - Y.row(j)).squaredNorm();
            if (dd < bd) {
                bd = dd;
                best = j;
            }
        }
        plan.entries.push_back({i, best, mass});
    }
    return plan;
}

}  // namespace

ICPResult icp_register(const Mat& source, const Mat& target, const ICPOptions& opts) {
    if (source.cols() != target.cols())
        throw std::invalid_argument("icp: dimension mismatch");
    std::mt19937_64 rng(opts.seed);
    const int d = static_cast<int>(source.cols());
    Mat cur = source;
    ICPResult out;
    out.transform.R = Mat::Identity(d, d);
    out.transform.t = Vec::Zero(d);

    for (int it = 0; it < opts.max_iters; ++it) {
        SparsePlan plan;
        switch (opts.correspondence) {
            case Correspondence::NN:
                plan = nn_plan(cur, target);
                break;
            case Correspondence::MIN_PS: {
                MinPSOptions mo;
                mo.num_directions = opts.num_directions;
                mo.seed = rng();
                MinPSResult mp = min_ps(DiscreteMeasure::uniform(cur),
                                        DiscreteMeasure::uniform(target), mo);
                plan = std::move(mp.plan);
                break;
            }
            case Correspondence::W2:
                plan = w2_exact(DiscreteMeasure::uniform(cur),
                                DiscreteMeasure::uniform(target)).plan;
                break;
        }
        RigidTransform T = procrustes(cur, target, plan);
        cur = T.apply(cur);
        out.transform.R = T.R * out.transform.R;
        out.transform.t = T.R * out.transform.t + T.t;
        out.iters = it + 1;

        double mse = 0.0, W = 0.0;
        for (const auto& e : plan.entries) {
            mse += e.mass * (cur.row(e.i) - target.row(e.j)).squaredNorm();
            W += e.mass;
        }
        out.rmse = std::sqrt(mse / W);

        double update = (T.R - Mat::Identity(d, d)).norm() + T.t.norm();
        if (update < opts.tol) break;
    }
    return out;
}

}  // namespace psot
