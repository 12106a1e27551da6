#include "nublur/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "nublur/blur_operator.hpp"

namespace nublur::io {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::io: return "io";
        case ErrorCode::bad_magic: return "bad magic";
        case ErrorCode::version_mismatch: return "version mismatch";
        case ErrorCode::truncated: return "truncated";
        case ErrorCode::trailing_data: return "trailing data";
        case ErrorCode::invariant_violation: return "invariant violation";
        case ErrorCode::unsupported_format: return "unsupported format";
        case ErrorCode::decode_failure: return "decode failure";
    }
    return "unknown";
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, double v) { put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

std::uint32_t get_u32(const std::uint8_t* p) {
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

float get_f32(const std::uint8_t* p) { return std::bit_cast<float>(get_u32(p)); }

constexpr std::size_t kHeaderBytes = 24;

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

}  // namespace

std::vector<std::uint8_t> encode_blurfield(const BlurField& field) {
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderBytes + 4 * (field.basis().data().size() + field.mixing().data().size()));
    for (char ch : {'N', 'U', 'B', 'F'}) out.push_back(static_cast<std::uint8_t>(ch));
    put_u32(out, kNubfVersion);
    put_u32(out, static_cast<std::uint32_t>(field.count()));
    put_u32(out, static_cast<std::uint32_t>(field.side()));
    put_u32(out, static_cast<std::uint32_t>(field.height()));
    put_u32(out, static_cast<std::uint32_t>(field.width()));
    for (double v : field.basis().data()) put_f32(out, v);
    for (double v : field.mixing().data()) put_f32(out, v);
    return out;
}

RawBlurField decode_blurfield_raw(std::span<const std::uint8_t> bytes) {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), "NUBF", 4) != 0) {
        throw FormatError(ErrorCode::bad_magic, "not a NUBF file (bad magic)");
    }
    if (bytes.size() < kHeaderBytes) {
        throw FormatError(ErrorCode::truncated, "truncated NUBF header: missing " +
                                                    std::to_string(kHeaderBytes - bytes.size()) + " bytes");
    }
    const std::uint32_t version = get_u32(bytes.data() + 4);
    if (version != kNubfVersion) {
        throw FormatError(ErrorCode::version_mismatch, "unsupported NUBF version " + std::to_string(version));
    }
    const std::uint32_t count = get_u32(bytes.data() + 8);
    const std::uint32_t side = get_u32(bytes.data() + 12);
    const std::uint32_t height = get_u32(bytes.data() + 16);
    const std::uint32_t width = get_u32(bytes.data() + 20);
    constexpr std::uint32_t kLimit = 1u << 20;
    if (count == 0 || side == 0 || height == 0 || width == 0 || count > kLimit || side > kLimit ||
        height > kLimit || width > kLimit) {
        throw FormatError(ErrorCode::invariant_violation, "NUBF header has out-of-range dimensions");
    }
    const std::uint64_t kernel_values = std::uint64_t(count) * side * side;
    const std::uint64_t mixing_values = std::uint64_t(count) * height * width;
    const std::uint64_t expected = kHeaderBytes + 4 * (kernel_values + mixing_values);
    if (bytes.size() < expected) {
        throw FormatError(ErrorCode::truncated,
                          "truncated NUBF payload: missing " + std::to_string(expected - bytes.size()) + " bytes");
    }
    if (bytes.size() > expected) {
        throw FormatError(ErrorCode::trailing_data,
                          "NUBF file has " + std::to_string(bytes.size() - expected) + " trailing bytes");
    }
    RawBlurField raw;
    raw.count = static_cast<int>(count);
    raw.side = static_cast<int>(side);
    raw.height = static_cast<int>(height);
    raw.width = static_cast<int>(width);
    const std::uint8_t* p = bytes.data() + kHeaderBytes;
    raw.kernels.resize(kernel_values);
    for (auto& v : raw.kernels) v = get_f32(p), p += 4;
    raw.mixing.resize(mixing_values);
    for (auto& v : raw.mixing) v = get_f32(p), p += 4;
    return raw;
}

BlurField decode_blurfield(std::span<const std::uint8_t> bytes, ReadOptions options) {
    RawBlurField raw = decode_blurfield_raw(bytes);
    try {
        return BlurField::from_raw(std::move(raw), {options.tolerance, options.renormalize});
    } catch (const InvariantError& e) {
        throw FormatError(ErrorCode::invariant_violation, std::string("NUBF invariant violation: ") + e.what());
    }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(ErrorCode::io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw FormatError(ErrorCode::io, "read error on " + path.string());
    return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(ErrorCode::io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError(ErrorCode::io, "write error on " + path.string());
}

void write_blurfield(const BlurField& field, const std::filesystem::path& path) {
    write_file(path, encode_blurfield(field));
}

BlurField read_blurfield(const std::filesystem::path& path, ReadOptions options) {
    return decode_blurfield(read_file(path), options);
}

// ---------------------------------------------------------------------------
// PFM

std::vector<std::uint8_t> encode_pfm(const Image& image) {
    const std::string header = std::string(image.channels() == 3 ? "PF" : "Pf") + "\n" +
                               std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n-1.0\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + 4 * image.size());
    // Rows are stored bottom to top, channels interleaved.
    for (int r = image.height() - 1; r >= 0; --r) {
        for (int c = 0; c < image.width(); ++c) {
            for (int ch = 0; ch < image.channels(); ++ch) put_f32(out, image.at(ch, r, c));
        }
    }
    return out;
}

Image decode_pfm(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 0;
    auto token = [&]() {
        while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
        std::string t;
        while (pos < bytes.size() && !std::isspace(bytes[pos])) t.push_back(static_cast<char>(bytes[pos++]));
        return t;
    };
    const std::string magic = token();
    int channels;
    if (magic == "PF") {
        channels = 3;
    } else if (magic == "Pf") {
        channels = 1;
    } else {
        throw FormatError(ErrorCode::bad_magic, "not a PFM file");
    }
    int width = 0, height = 0;
    double scale = 0.0;
    try {
        width = std::stoi(token());
        height = std::stoi(token());
        scale = std::stod(token());
    } catch (const std::exception&) {
        throw FormatError(ErrorCode::decode_failure, "malformed PFM header");
    }
    if (width <= 0 || height <= 0 || scale == 0.0) throw FormatError(ErrorCode::decode_failure, "malformed PFM header");
    ++pos;  // single whitespace after the scale
    const bool little = scale < 0.0;
    const std::uint64_t expected = pos + 4ull * width * height * channels;
    if (bytes.size() < expected) {
        throw FormatError(ErrorCode::truncated,
                          "truncated PFM payload: missing " + std::to_string(expected - bytes.size()) + " bytes");
    }
    std::vector<double> data(static_cast<std::size_t>(width) * height * channels);
    const std::size_t plane = static_cast<std::size_t>(width) * height;
    const std::uint8_t* p = bytes.data() + pos;
    for (int r = height - 1; r >= 0; --r) {
        for (int c = 0; c < width; ++c) {
            for (int ch = 0; ch < channels; ++ch) {
                std::uint32_t bits = get_u32(p);
                if (!little) bits = __builtin_bswap32(bits);
                data[ch * plane + static_cast<std::size_t>(r) * width + c] = std::bit_cast<float>(bits);
                p += 4;
            }
        }
    }
    try {
        return Image(width, height, channels, std::move(data));
    } catch (const std::invalid_argument& e) {
        throw FormatError(ErrorCode::decode_failure, std::string("PFM: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// PNG

namespace {

struct PngPixels {
    int width = 0;
    int height = 0;
    int channels = 0;  // 1 or 3 after transforms
    int depth = 0;     // 8 or 16
    std::vector<std::uint8_t> rows;
};

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};

// Only trivially destructible objects may be created between setjmp and the
// last libpng call in this function.
bool png_read_pixels(std::FILE* fp, PngPixels& px, std::string& error) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) {
        error = "png_create_read_struct failed";
        return false;
    }
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        error = "png_create_info_struct failed";
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        error = "corrupt PNG data";
        return false;
    }
    png_init_io(png, fp);
    png_read_info(png, info);
    const png_byte color = png_get_color_type(png, info);
    const png_byte bit_depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    px.width = static_cast<int>(png_get_image_width(png, info));
    px.height = static_cast<int>(png_get_image_height(png, info));
    px.channels = png_get_channels(png, info);
    px.depth = png_get_bit_depth(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    px.rows.resize(rowbytes * px.height);
    for (int r = 0; r < px.height; ++r) png_read_row(png, px.rows.data() + r * rowbytes, nullptr);
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
}

PngPixels load_png(const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw FormatError(ErrorCode::io, "cannot open " + path.string());
    png_byte sig[8];
    if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        throw FormatError(ErrorCode::bad_magic, path.string() + " is not a PNG file");
    }
    std::rewind(fp.get());
    PngPixels px;
    std::string error;
    if (!png_read_pixels(fp.get(), px, error)) throw FormatError(ErrorCode::decode_failure, path.string() + ": " + error);
    if (px.channels != 1 && px.channels != 3) {
        throw FormatError(ErrorCode::unsupported_format, path.string() + ": unsupported channel layout");
    }
    return px;
}

std::uint32_t png_sample(const PngPixels& px, std::size_t index) {
    if (px.depth == 16) return std::uint32_t(px.rows[2 * index]) << 8 | px.rows[2 * index + 1];
    return px.rows[index];
}

Image read_png(const std::filesystem::path& path) {
    const PngPixels px = load_png(path);
    const double maxval = px.depth == 16 ? 65535.0 : 255.0;
    Image img(px.width, px.height, px.channels);
    for (int r = 0; r < px.height; ++r) {
        for (int c = 0; c < px.width; ++c) {
            for (int ch = 0; ch < px.channels; ++ch) {
                const std::size_t idx = (static_cast<std::size_t>(r) * px.width + c) * px.channels + ch;
                img.at(ch, r, c) = png_sample(px, idx) / maxval;
            }
        }
    }
    return img;
}

bool png_write_pixels(std::FILE* fp, int width, int height, int channels, int depth,
                      const std::vector<std::uint8_t>& rows, std::string& error) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) {
        error = "png_create_write_struct failed";
        return false;
    }
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        error = "png_create_info_struct failed";
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        error = "PNG encoding failed";
        return false;
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, width, height, depth, channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t rowbytes = static_cast<std::size_t>(width) * channels * (depth / 8);
    for (int r = 0; r < height; ++r) png_write_row(png, rows.data() + r * rowbytes);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

void write_png_samples(const std::filesystem::path& path, int width, int height, int channels, int depth,
                       const std::vector<std::uint8_t>& rows) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw FormatError(ErrorCode::io, "cannot open " + path.string() + " for writing");
    std::string error;
    if (!png_write_pixels(fp.get(), width, height, channels, depth, rows, error)) {
        throw FormatError(ErrorCode::io, path.string() + ": " + error);
    }
    if (std::fflush(fp.get()) != 0) throw FormatError(ErrorCode::io, "write error on " + path.string());
}

void write_png(const Image& image, const std::filesystem::path& path, PngDepth depth) {
    const int bits = static_cast<int>(depth);
    const double maxval = bits == 16 ? 65535.0 : 255.0;
    std::vector<std::uint8_t> rows;
    rows.reserve(image.size() * (bits / 8));
    for (int r = 0; r < image.height(); ++r) {
        for (int c = 0; c < image.width(); ++c) {
            for (int ch = 0; ch < image.channels(); ++ch) {
                const auto q = static_cast<std::uint32_t>(std::lround(std::clamp(image.at(ch, r, c), 0.0, 1.0) * maxval));
                if (bits == 16) rows.push_back(static_cast<std::uint8_t>(q >> 8));
                rows.push_back(static_cast<std::uint8_t>(q & 0xFF));
            }
        }
    }
    write_png_samples(path, image.width(), image.height(), image.channels(), bits, rows);
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
    const std::string ext = lower_extension(path);
    if (ext == ".pfm") return decode_pfm(read_file(path));
    if (ext == ".png") return read_png(path);
    throw FormatError(ErrorCode::unsupported_format, "unsupported image format '" + ext + "' for " + path.string());
}

void write_image(const Image& image, const std::filesystem::path& path, PngDepth depth) {
    const std::string ext = lower_extension(path);
    if (ext == ".pfm") {
        write_file(path, encode_pfm(image));
    } else if (ext == ".png") {
        write_png(image, path, depth);
    } else {
        throw FormatError(ErrorCode::unsupported_format, "unsupported image format '" + ext + "' for " + path.string());
    }
}

SegmentLabels read_labels(const std::filesystem::path& path) {
    if (lower_extension(path) != ".png") {
        throw FormatError(ErrorCode::unsupported_format, "label maps must be PNG: " + path.string());
    }
    const PngPixels px = load_png(path);
    if (px.channels != 1) throw FormatError(ErrorCode::unsupported_format, "label map must be grayscale: " + path.string());
    std::vector<std::uint32_t> labels(static_cast<std::size_t>(px.width) * px.height);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = png_sample(px, i);
    return SegmentLabels(px.width, px.height, std::move(labels));
}

void write_labels(const SegmentLabels& labels, const std::filesystem::path& path) {
    std::vector<std::uint8_t> rows;
    rows.reserve(labels.data().size() * 2);
    for (auto l : labels.data()) {
        if (l > 65535) throw FormatError(ErrorCode::unsupported_format, "label exceeds 16 bits");
        rows.push_back(static_cast<std::uint8_t>(l >> 8));
        rows.push_back(static_cast<std::uint8_t>(l & 0xFF));
    }
    write_png_samples(path, labels.width(), labels.height(), 1, 16, rows);
}

Image render_kernel_grid(const BlurField& field, int stride) {
    const int side = field.side();
    if (stride < side) {
        throw std::invalid_argument("stride " + std::to_string(stride) + " is smaller than kernel side " +
                                    std::to_string(side));
    }
    const int nx = field.width() / stride;
    const int ny = field.height() / stride;
    if (nx == 0 || ny == 0) throw std::invalid_argument("stride larger than the field");
    constexpr double kSeparator = 0.5;
    const int out_w = nx * side + (nx - 1);
    const int out_h = ny * side + (ny - 1);
    Image out = Image::filled(out_w, out_h, 1, kSeparator);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const auto k = assemble_kernel_at(field, j * stride + stride / 2, i * stride + stride / 2);
            const double peak = *std::max_element(k.begin(), k.end());
            const int oy = j * (side + 1), ox = i * (side + 1);
            for (int r = 0; r < side; ++r) {
                for (int c = 0; c < side; ++c) {
                    out.at(0, oy + r, ox + c) = peak > 0.0 ? k[r * side + c] / peak : 0.0;
                }
            }
        }
    }
    return out;
}

}  // namespace nublur::io
