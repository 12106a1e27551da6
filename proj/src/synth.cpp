#include "nublur/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "nublur/conv.hpp"
#include "nublur/io.hpp"

namespace nublur::synth {

void TrajectoryParams::validate() const {
    if (steps < 1) throw std::invalid_argument("trajectory: steps must be >= 1");
    if (!(exposure > 0.0 && exposure <= 1.0)) throw std::invalid_argument("trajectory: exposure must lie in (0, 1]");
    if (!(damping >= 0.0 && damping < 1.0)) throw std::invalid_argument("trajectory: damping must lie in [0, 1)");
    if (!(accel_sigma >= 0.0)) throw std::invalid_argument("trajectory: accel_sigma must be >= 0");
}

std::vector<Point2> sample_trajectory(const TrajectoryParams& params) {
    params.validate();
    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double dt = params.dt();
    const double kick = params.accel_sigma * std::sqrt(dt);

    std::vector<Point2> path;
    path.reserve(params.steps + 1);
    Point2 pos{0.0, 0.0}, vel{0.0, 0.0};
    path.push_back(pos);
    for (int t = 0; t < params.steps; ++t) {
        vel.x = params.damping * vel.x + kick * normal(rng);
        vel.y = params.damping * vel.y + kick * normal(rng);
        pos.x += vel.x * dt;
        pos.y += vel.y * dt;
        path.push_back(pos);
    }

    Point2 centroid{0.0, 0.0};
    for (const auto& p : path) {
        centroid.x += p.x;
        centroid.y += p.y;
    }
    centroid.x /= static_cast<double>(path.size());
    centroid.y /= static_cast<double>(path.size());
    for (auto& p : path) {
        p.x -= centroid.x;
        p.y -= centroid.y;
    }
    return path;
}

std::optional<std::vector<double>> rasterize_kernel(std::span<const Point2> trajectory, int side) {
    if (side < 3 || side % 2 == 0) throw std::invalid_argument("kernel side must be odd and >= 3");
    if (trajectory.empty()) throw std::invalid_argument("empty trajectory");
    const double center = (side - 1) / 2.0;
    const double lo = 1.0, hi = side - 2.0;
    std::vector<double> k(static_cast<std::size_t>(side) * side, 0.0);
    for (const auto& p : trajectory) {
        const double gx = center + p.x;
        const double gy = center + p.y;
        if (!(gx >= lo && gx <= hi && gy >= lo && gy <= hi)) return std::nullopt;
        const int x0 = static_cast<int>(std::floor(gx));
        const int y0 = static_cast<int>(std::floor(gy));
        const double fx = gx - x0, fy = gy - y0;
        k[static_cast<std::size_t>(y0) * side + x0] += (1.0 - fx) * (1.0 - fy);
        if (fx > 0.0) k[static_cast<std::size_t>(y0) * side + x0 + 1] += fx * (1.0 - fy);
        if (fy > 0.0) k[static_cast<std::size_t>(y0 + 1) * side + x0] += (1.0 - fx) * fy;
        if (fx > 0.0 && fy > 0.0) k[static_cast<std::size_t>(y0 + 1) * side + x0 + 1] += fx * fy;
    }
    double sum = 0.0;
    for (double v : k) sum += v;
    for (double& v : k) v /= sum;
    return k;
}

std::vector<double> sample_kernel(TrajectoryParams params, int side, std::mt19937_64& rng, int max_attempts) {
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        params.seed = rng();
        const auto path = sample_trajectory(params);
        if (auto k = rasterize_kernel(path, side)) return std::move(*k);
    }
    throw std::runtime_error("no trajectory fit a " + std::to_string(side) + "x" + std::to_string(side) +
                             " kernel after " + std::to_string(max_attempts) + " attempts");
}

std::vector<std::uint32_t> object_labels(const SegmentLabels& labels) {
    std::vector<std::uint32_t> out;
    for (auto l : labels.data()) {
        if (l != 0) out.push_back(l);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

SegmentLabels select_object_regions(const SegmentLabels& labels, int max_regions, std::size_t min_pixels) {
    std::map<std::uint32_t, std::size_t> area;
    for (auto l : labels.data()) {
        if (l != 0) ++area[l];
    }
    std::vector<std::pair<std::uint32_t, std::size_t>> candidates;
    for (const auto& [label, n] : area) {
        if (n >= min_pixels) candidates.emplace_back(label, n);
    }
    // Largest first; ties broken by label for determinism.
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (static_cast<int>(candidates.size()) > max_regions) candidates.resize(max_regions);
    std::sort(candidates.begin(), candidates.end());
    std::map<std::uint32_t, std::uint32_t> remap;
    for (std::size_t i = 0; i < candidates.size(); ++i) remap[candidates[i].first] = static_cast<std::uint32_t>(i + 1);

    std::vector<std::uint32_t> out(labels.data().size(), 0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto it = remap.find(labels.data()[i]);
        if (it != remap.end()) out[i] = it->second;
    }
    return SegmentLabels(labels.width(), labels.height(), std::move(out));
}

SynthResult synth_blur(const SceneSpec& spec, bool want_dense) {
    const Image& u = spec.sharp;
    const auto& labels = spec.labels;
    if (labels.width() != u.width() || labels.height() != u.height()) {
        throw std::invalid_argument("synth: label map does not match image");
    }
    const auto objects = object_labels(labels);
    if (static_cast<int>(objects.size()) > kMaxObjectRegions) {
        throw std::invalid_argument("synth: at most " + std::to_string(kMaxObjectRegions) + " object regions");
    }
    const int regions = static_cast<int>(objects.size()) + 1;
    if (static_cast<int>(spec.kernels.size()) != regions) {
        throw std::invalid_argument("synth: " + std::to_string(spec.kernels.size()) + " kernels for " +
                                    std::to_string(regions) + " regions");
    }
    std::vector<double> flat;
    for (const auto& k : spec.kernels) flat.insert(flat.end(), k.begin(), k.end());
    KernelBasis basis(regions, spec.side, std::move(flat));

    const int w = u.width(), h = u.height();
    const std::size_t n = u.plane_size();

    // Background mask = 1 - sum of object masks, i.e. the label-0 indicator.
    std::vector<std::vector<double>> masks(regions, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const auto l = labels.data()[i];
        const int r = l == 0 ? 0 : 1 + static_cast<int>(std::lower_bound(objects.begin(), objects.end(), l) -
                                                          objects.begin());
        masks[r][i] = 1.0;
    }
    for (int r = 1; r < regions; ++r) {
        std::size_t area = 0;
        for (double v : masks[r]) area += v > 0.0;
        if (area < kMinRegionPixels) {
            throw std::invalid_argument("synth: object region " + std::to_string(r) + " has " + std::to_string(area) +
                                        " pixels, need " + std::to_string(kMinRegionPixels));
        }
    }

    std::vector<std::vector<double>> smoothed(regions);
    std::vector<double> total(n, 0.0);
    for (int r = 0; r < regions; ++r) {
        smoothed[r] = conv::convolve_circular({masks[r], w, h}, {basis.kernel(r), spec.side});
        for (std::size_t i = 0; i < n; ++i) {
            smoothed[r][i] = std::max(smoothed[r][i], 0.0);  // FFT roundoff
            total[i] += smoothed[r][i];
        }
    }
    std::vector<double> mixing(n * regions);
    for (std::size_t i = 0; i < n; ++i) {
        const bool degenerate = total[i] < 1e-12;
        for (int r = 0; r < regions; ++r) {
            mixing[r * n + i] = degenerate ? masks[r][i] : smoothed[r][i] / total[i];
        }
    }
    MixingField mix(regions, w, h, std::move(mixing));

    Image unclipped(w, h, u.channels());
    for (int c = 0; c < u.channels(); ++c) {
        auto acc = unclipped.plane(c);
        for (int r = 0; r < regions; ++r) {
            const auto blurred = conv::convolve_circular({u.plane(c), w, h}, {basis.kernel(r), spec.side});
            const auto m = mix.map(r);
            for (std::size_t i = 0; i < n; ++i) acc[i] += m[i] * blurred[i];
        }
    }
    Image clipped = unclipped;
    for (double& x : clipped.data()) x = std::clamp(x, 0.0, 1.0);

    SynthResult result{std::move(clipped), std::move(unclipped), BlurField(std::move(basis), std::move(mix)),
                       std::nullopt};
    if (want_dense) result.dense = densify(result.field);
    return result;
}

SynthResult synth_blur_padded(const SceneSpec& spec, bool want_dense) {
    const int margin = (spec.side + 1) / 2;
    const int w = spec.labels.width(), h = spec.labels.height();
    const int pw = w + 2 * margin, ph = h + 2 * margin;
    std::vector<std::uint32_t> labels(static_cast<std::size_t>(pw) * ph);
    for (int r = 0; r < ph; ++r) {
        const int sr = std::clamp(r - margin, 0, h - 1);
        for (int c = 0; c < pw; ++c) {
            labels[static_cast<std::size_t>(r) * pw + c] = spec.labels.at(sr, std::clamp(c - margin, 0, w - 1));
        }
    }
    const SynthResult padded = synth_blur(
        {conv::pad_edge(spec.sharp, margin), SegmentLabels(pw, ph, std::move(labels)), spec.side, spec.kernels});
    SynthResult result{conv::crop(padded.blurry, margin), conv::crop(padded.blurry_unclipped, margin),
                       crop_field(padded.field, margin), std::nullopt};
    if (want_dense) result.dense = densify(result.field);
    return result;
}

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double d = mx - mn;
    v = mx;
    s = mx > 0.0 ? d / mx : 0.0;
    if (d <= 0.0) {
        h = 0.0;
        return;
    }
    if (mx == r) {
        h = (g - b) / d;
    } else if (mx == g) {
        h = 2.0 + (b - r) / d;
    } else {
        h = 4.0 + (r - g) / d;
    }
    h /= 6.0;
    if (h < 0.0) h += 1.0;
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
    if (s <= 0.0) {
        r = g = b = v;
        return;
    }
    const double hh = 6.0 * (h - std::floor(h));
    const int sector = std::min(static_cast<int>(hh), 5);
    const double f = hh - sector;
    const double p = v * (1.0 - s);
    const double q = v * (1.0 - s * f);
    const double t = v * (1.0 - s * (1.0 - f));
    switch (sector) {
        case 0: r = v, g = t, b = p; break;
        case 1: r = q, g = v, b = p; break;
        case 2: r = p, g = v, b = t; break;
        case 3: r = p, g = q, b = v; break;
        case 4: r = t, g = p, b = v; break;
        default: r = v, g = p, b = q; break;
    }
}

Image augment_exposure(const Image& u, double scale) {
    if (u.channels() != 3) throw std::invalid_argument("exposure augmentation needs an RGB image");
    if (!(scale >= 0.5 && scale <= 1.5)) throw std::invalid_argument("exposure scale must lie in [0.5, 1.5]");
    Image out(u.width(), u.height(), 3);
    auto R = u.plane(0), G = u.plane(1), B = u.plane(2);
    auto oR = out.plane(0), oG = out.plane(1), oB = out.plane(2);
    for (std::size_t i = 0; i < u.plane_size(); ++i) {
        double h, s, v, r, g, b;
        rgb_to_hsv(R[i], G[i], B[i], h, s, v);
        hsv_to_rgb(h, s, v * scale, r, g, b);
        oR[i] = std::clamp(r, 0.0, 1.0);
        oG[i] = std::clamp(g, 0.0, 1.0);
        oB[i] = std::clamp(b, 0.0, 1.0);
    }
    return out;
}

double random_exposure_scale(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.5, 1.5)(rng); }

std::uint64_t item_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 over the pair
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::string format_manifest_row(const ManifestRow& row) {
    std::ostringstream os;
    os << row.sharp_path << '\t' << row.blurry_path << '\t' << row.field_path << '\t' << row.seed << '\t'
       << row.regions;
    return os.str();
}

namespace {

ManifestRow make_item(const LabeledImage& item, const DatasetOptions& options, int index,
                      const std::filesystem::path& out_dir) {
    const std::uint64_t seed = item_seed(options.seed, static_cast<std::uint64_t>(index));
    std::mt19937_64 rng(seed);

    const SegmentLabels regions = select_object_regions(item.labels);
    const int count = static_cast<int>(object_labels(regions).size()) + 1;
    std::vector<std::vector<double>> kernels;
    for (int r = 0; r < count; ++r) kernels.push_back(sample_kernel(options.trajectory, options.side, rng));

    const double scale = random_exposure_scale(rng);
    Image sharp;
    if (item.image.channels() == 3) {
        sharp = augment_exposure(item.image, scale);
    } else {
        // Grayscale: value channel is the intensity itself.
        sharp = item.image;
        for (double& x : sharp.data()) x = std::clamp(x * scale, 0.0, 1.0);
    }

    const SynthResult res = synth_blur_padded({sharp, regions, options.side, std::move(kernels)});

    char stem[32];
    std::snprintf(stem, sizeof stem, "sample_%06d", index);
    ManifestRow row{std::string(stem) + "_sharp.pfm", std::string(stem) + "_blurry.pfm",
                    std::string(stem) + "_field.nubf", seed, count - 1};
    io::write_image(sharp, out_dir / row.sharp_path);
    io::write_image(res.blurry, out_dir / row.blurry_path);
    io::write_blurfield(res.field, out_dir / row.field_path);
    return row;
}

}  // namespace

DatasetReport generate_dataset(std::span<const LabeledImage> items, const DatasetOptions& options,
                               const std::filesystem::path& out_dir) {
    options.trajectory.validate();
    if (options.side < 3 || options.side % 2 == 0) throw std::invalid_argument("kernel size must be odd and >= 3");
    std::filesystem::create_directories(out_dir);

    const int total = items.empty() ? 0 : (options.count < 0 ? static_cast<int>(items.size()) : options.count);
    std::vector<std::optional<ManifestRow>> rows(total);
    std::vector<std::string> errors(total);

    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < total; i = next++) {
            try {
                rows[i] = make_item(items[i % items.size()], options, i, out_dir);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const int nthreads = std::clamp(options.workers, 1, std::max(total, 1));
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    DatasetReport report;
    for (int i = 0; i < total; ++i) {
        if (rows[i]) {
            report.rows.push_back(*rows[i]);
        } else {
            report.failures.emplace_back(i, errors[i]);
        }
    }
    std::ofstream manifest(out_dir / "manifest.tsv", std::ios::binary);
    if (!manifest) throw std::runtime_error("cannot write " + (out_dir / "manifest.tsv").string());
    for (const auto& row : report.rows) manifest << format_manifest_row(row) << '\n';
    return report;
}

}  // namespace nublur::synth
