#include "vessel/imageio.hpp"

#include "vessel/error.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace vessel {

void validate_unit_image(const Image2D& img, const char* what) {
    if (img.rows() < 1 || img.cols() < 1) throw InvalidArgument("zero-size image", what);
    if (!img.allFinite()) throw InvalidArgument("non-finite pixel values", what);
    if ((img < 0.0).any() || (img > 1.0).any()) throw InvalidArgument("values outside [0,1]", what);
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

bool has_png_signature(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    unsigned char sig[8] = {};
    in.read(reinterpret_cast<char*>(sig), 8);
    return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

// PGM header tokens, skipping '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

LoadedImage load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    if (next_token(in) != "P5") throw IoError("not a binary PGM (P5): " + path.string());
    int width = 0, height = 0, maxval = 0;
    try {
        width = std::stoi(next_token(in));
        height = std::stoi(next_token(in));
        maxval = std::stoi(next_token(in));
    } catch (const std::exception&) {
        throw IoError("malformed PGM header: " + path.string());
    }
    if (width <= 0 || height <= 0) throw IoError("zero-size image: " + path.string());
    if (maxval != 255 && maxval != 65535)
        throw IoError("unsupported bit depth (maxval " + std::to_string(maxval) + "): " + path.string());

    const bool wide = maxval == 65535;
    const std::size_t count = static_cast<std::size_t>(width) * height;
    std::vector<unsigned char> buf(count * (wide ? 2 : 1));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size()) throw IoError("truncated PGM: " + path.string());

    LoadedImage out;
    out.bit_depth = wide ? 16 : 8;
    out.pixels.resize(height, width);
    for (std::size_t i = 0; i < count; ++i) {
        const double v = wide ? static_cast<double>((buf[2 * i] << 8) | buf[2 * i + 1]) : buf[i];
        out.pixels.data()[i] = v / maxval;
    }
    return out;
}

LoadedImage load_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) throw IoError("cannot open " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng initialisation failed");
    }
    std::vector<std::vector<png_byte>> rows;
    std::vector<png_bytep> row_ptrs;
    std::string failure;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("corrupt PNG: " + path.string());
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);

    if (width == 0 || height == 0) failure = "zero-size image";
    if (color == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
    } else if (depth != 8 && depth != 16) {
        failure = "unsupported bit depth " + std::to_string(depth);
    }
    if (!failure.empty()) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError(failure + ": " + path.string());
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int channels = png_get_channels(png, info);
    const int out_depth = png_get_bit_depth(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    rows.assign(height, std::vector<png_byte>(rowbytes));
    row_ptrs.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) row_ptrs[y] = rows[y].data();
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    LoadedImage out;
    out.bit_depth = out_depth;
    out.green_channel = channels >= 3;
    const int pick = channels >= 3 ? 1 : 0;
    const double maxval = out_depth == 16 ? 65535.0 : 255.0;
    out.pixels.resize(height, width);
    for (png_uint_32 y = 0; y < height; ++y) {
        const png_byte* r = rows[y].data();
        for (png_uint_32 x = 0; x < width; ++x) {
            const std::size_t idx = static_cast<std::size_t>(x) * channels + pick;
            const double v = out_depth == 16 ? static_cast<double>((r[2 * idx] << 8) | r[2 * idx + 1]) : r[idx];
            out.pixels(y, x) = v / maxval;
        }
    }
    return out;
}

std::uint16_t quantize(double v, int maxval) {
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint16_t>(std::lround(c * maxval));
}

using WriteSink = void (*)(png_structp, png_bytep, png_size_t);

void write_png_impl(png_structp png, png_infop info, int width, int height, int depth, int color,
                    const std::vector<std::vector<png_byte>>& rows) {
    png_set_IHDR(png, info, width, height, depth, color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (const auto& r : rows) png_write_row(png, const_cast<png_bytep>(r.data()));
    png_write_end(png, nullptr);
}

void append_to_string(png_structp png, png_bytep data, png_size_t len) {
    auto* s = static_cast<std::string*>(png_get_io_ptr(png));
    s->append(reinterpret_cast<const char*>(data), len);
}

void no_flush(png_structp) {}

// Writes rows either to a file or into a string.
void emit_png(std::FILE* file, std::string* sink, int width, int height, int depth, int color,
              const std::vector<std::vector<png_byte>>& rows) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encoding failed");
    }
    if (file) {
        png_init_io(png, file);
    } else {
        png_set_write_fn(png, sink, append_to_string, no_flush);
    }
    write_png_impl(png, info, width, height, depth, color, rows);
    png_destroy_write_struct(&png, &info);
}

std::vector<std::vector<png_byte>> gray_rows(const Image2D& img, int depth) {
    const int maxval = depth == 16 ? 65535 : 255;
    std::vector<std::vector<png_byte>> rows(img.rows());
    for (Eigen::Index y = 0; y < img.rows(); ++y) {
        auto& r = rows[y];
        r.resize(img.cols() * (depth == 16 ? 2 : 1));
        for (Eigen::Index x = 0; x < img.cols(); ++x) {
            const std::uint16_t q = quantize(img(y, x), maxval);
            if (depth == 16) {
                r[2 * x] = static_cast<png_byte>(q >> 8);
                r[2 * x + 1] = static_cast<png_byte>(q & 0xff);
            } else {
                r[x] = static_cast<png_byte>(q);
            }
        }
    }
    return rows;
}

std::vector<std::vector<png_byte>> rgb_rows(const RgbImage& img) {
    std::vector<std::vector<png_byte>> rows(img.height);
    for (int y = 0; y < img.height; ++y) {
        const auto* begin = img.at(0, y);
        rows[y].assign(begin, begin + static_cast<std::size_t>(img.width) * 3);
    }
    return rows;
}

FilePtr open_for_write(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) throw IoError("cannot write " + path.string());
    return fp;
}

}  // namespace

LoadedImage load_grayscale(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
    LoadedImage img = has_png_signature(path) ? load_png(path) : load_pgm(path);
    if (img.pixels.size() == 0) throw IoError("zero-size image: " + path.string());
    return img;
}

void save_grayscale(const std::filesystem::path& path, const Image2D& img, int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16) throw InvalidArgument("must be 8 or 16", "bit_depth");
    if (img.size() == 0) throw InvalidArgument("zero-size image", "image");
    if (path.extension() == ".pgm") {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path.string());
        const int maxval = bit_depth == 16 ? 65535 : 255;
        out << "P5\n" << img.cols() << ' ' << img.rows() << '\n' << maxval << '\n';
        for (Eigen::Index i = 0; i < img.size(); ++i) {
            const std::uint16_t q = quantize(img.data()[i], maxval);
            if (bit_depth == 16) out.put(static_cast<char>(q >> 8));
            out.put(static_cast<char>(q & 0xff));
        }
        if (!out) throw IoError("write failed: " + path.string());
        return;
    }
    auto fp = open_for_write(path);
    emit_png(fp.get(), nullptr, static_cast<int>(img.cols()), static_cast<int>(img.rows()), bit_depth,
             PNG_COLOR_TYPE_GRAY, gray_rows(img, bit_depth));
}

void save_gray16(const std::filesystem::path& path, const Raster<std::uint16_t>& values) {
    std::vector<std::vector<png_byte>> rows(values.rows());
    for (Eigen::Index y = 0; y < values.rows(); ++y) {
        rows[y].resize(values.cols() * 2);
        for (Eigen::Index x = 0; x < values.cols(); ++x) {
            rows[y][2 * x] = static_cast<png_byte>(values(y, x) >> 8);
            rows[y][2 * x + 1] = static_cast<png_byte>(values(y, x) & 0xff);
        }
    }
    auto fp = open_for_write(path);
    emit_png(fp.get(), nullptr, static_cast<int>(values.cols()), static_cast<int>(values.rows()), 16,
             PNG_COLOR_TYPE_GRAY, rows);
}

void save_rgb_png(const std::filesystem::path& path, const RgbImage& img) {
    if (img.width <= 0 || img.height <= 0) throw InvalidArgument("zero-size image", "image");
    auto fp = open_for_write(path);
    emit_png(fp.get(), nullptr, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, rgb_rows(img));
}

std::string encode_png(const Image2D& img) {
    std::string out;
    emit_png(nullptr, &out, static_cast<int>(img.cols()), static_cast<int>(img.rows()), 8, PNG_COLOR_TYPE_GRAY,
             gray_rows(img, 8));
    return out;
}

std::string encode_png(const RgbImage& img) {
    std::string out;
    emit_png(nullptr, &out, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, rgb_rows(img));
    return out;
}

}  // namespace vessel
