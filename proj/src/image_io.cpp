#include "corescale/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>
#include <vector>

#include "corescale/error.hpp"

namespace corescale {
namespace {

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

// ---------------------------------------------------------------------------
// PGM

class PgmReader {
public:
    explicit PgmReader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

    std::size_t read_header_int() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
            throw Error("format", "malformed PGM header");
        }
        std::size_t value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
            if (value > (1u << 30)) throw Error("format", "PGM header value too large");
            ++pos_;
        }
        return value;
    }

    // Exactly one whitespace byte separates maxval from raster data in P5.
    void skip_single_space() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw Error("format", "malformed PGM header");
        }
        ++pos_;
    }

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<unsigned char>& bytes_;
    std::size_t pos_ = 2;
};

GrayImage load_pgm(const std::vector<unsigned char>& bytes) {
    const bool ascii = bytes[1] == '2';
    PgmReader reader(bytes);
    const std::size_t w = reader.read_header_int();
    const std::size_t h = reader.read_header_int();
    const std::size_t maxval = reader.read_header_int();
    if (w == 0 || h == 0) throw Error("format", "PGM has zero dimension");
    if (maxval == 0 || maxval > 65535) throw Error("format", "PGM maxval out of range");
    const double scale = static_cast<double>(maxval);

    std::vector<double> px(w * h);
    if (ascii) {
        for (auto& v : px) {
            std::size_t s = 0;
            try {
                s = reader.read_header_int();
            } catch (const Error&) {
                throw Error("size_mismatch", "PGM body shorter than header dimensions");
            }
            if (s > maxval) throw Error("format", "PGM sample exceeds maxval");
            v = static_cast<double>(s) / scale;
        }
    } else {
        reader.skip_single_space();
        const std::size_t bps = maxval > 255 ? 2 : 1;
        if (reader.remaining() != w * h * bps) {
            throw Error("size_mismatch", "PGM body has " + std::to_string(reader.remaining()) +
                                             " bytes, header implies " + std::to_string(w * h * bps));
        }
        const unsigned char* p = bytes.data() + reader.pos();
        for (std::size_t i = 0; i < px.size(); ++i) {
            unsigned s = bps == 2 ? (unsigned(p[2 * i]) << 8) | p[2 * i + 1] : p[i];
            if (s > maxval) throw Error("format", "PGM sample exceeds maxval");
            px[i] = static_cast<double>(s) / scale;
        }
    }
    return GrayImage(w, h, std::move(px));
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path, int bit_depth) {
    const unsigned max_level = (1u << bit_depth) - 1;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot open '" + path.string() + "' for writing");
    out << "P5\n" << img.width() << ' ' << img.height() << '\n' << max_level << '\n';
    std::vector<unsigned char> raster;
    raster.reserve(img.size() * (bit_depth == 16 ? 2 : 1));
    for (double v : img.pixels()) {
        const unsigned s = quantize_sample(v, max_level);
        if (bit_depth == 16) raster.push_back(static_cast<unsigned char>(s >> 8));
        raster.push_back(static_cast<unsigned char>(s & 0xFF));
    }
    out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
    if (!out) throw Error("io", "write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// PNG

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_handler(png_structp png, png_const_charp msg) {
    auto* message = static_cast<std::string*>(png_get_error_ptr(png));
    if (message) *message = msg;
    png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

GrayImage load_png(const std::filesystem::path& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw Error("io", "cannot open '" + path.string() + "'");

    std::string message;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler,
                                             png_warning_handler);
    if (!png) throw Error("io", "libpng initialisation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error("io", "libpng initialisation failed");
    }

    std::vector<std::uint8_t> raw;
    std::vector<png_bytep> rows;
    png_uint_32 w = 0, h = 0;
    int depth = 0;
    int color = 0;
    volatile bool rejected_channels = false;
    volatile bool rejected_depth = false;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error("format", "invalid PNG '" + path.string() + "': " + message);
    }

    png_init_io(png, file.get());
    png_read_info(png, info);
    w = png_get_image_width(png, info);
    h = png_get_image_height(png, info);
    depth = png_get_bit_depth(png, info);
    color = png_get_color_type(png, info);
    if (color != PNG_COLOR_TYPE_GRAY || png_get_valid(png, info, PNG_INFO_tRNS)) {
        rejected_channels = true;
    } else if (depth != 8 && depth != 16) {
        rejected_depth = true;
    } else {
        png_set_interlace_handling(png);
        png_read_update_info(png, info);
        const std::size_t stride = png_get_rowbytes(png, info);
        raw.resize(stride * h);
        rows.resize(h);
        for (png_uint_32 y = 0; y < h; ++y) rows[y] = raw.data() + y * stride;
        png_read_image(png, rows.data());
        png_read_end(png, nullptr);
    }
    png_destroy_read_struct(&png, &info, nullptr);

    if (rejected_channels) throw Error("format", "unsupported channel count in '" + path.string() + "'");
    if (rejected_depth) {
        throw Error("format", "unsupported PNG bit depth " + std::to_string(depth) + " in '" +
                                  path.string() + "'");
    }

    const double scale = depth == 16 ? 65535.0 : 255.0;
    std::vector<double> px(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < px.size(); ++i) {
        const unsigned s = depth == 16 ? (unsigned(raw[2 * i]) << 8) | raw[2 * i + 1] : raw[i];
        px[i] = static_cast<double>(s) / scale;
    }
    return GrayImage(w, h, std::move(px));
}

void save_png(const GrayImage& img, const std::filesystem::path& path, int bit_depth) {
    const unsigned max_level = (1u << bit_depth) - 1;
    const std::size_t bps = bit_depth == 16 ? 2 : 1;
    std::vector<std::uint8_t> raw(img.size() * bps);
    std::size_t k = 0;
    for (double v : img.pixels()) {
        const unsigned s = quantize_sample(v, max_level);
        if (bps == 2) raw[k++] = static_cast<std::uint8_t>(s >> 8);
        raw[k++] = static_cast<std::uint8_t>(s & 0xFF);
    }
    std::vector<png_bytep> rows(img.height());
    for (std::size_t y = 0; y < img.height(); ++y) rows[y] = raw.data() + y * img.width() * bps;

    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw Error("io", "cannot open '" + path.string() + "' for writing");

    std::string message;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler,
                                              png_warning_handler);
    if (!png) throw Error("io", "libpng initialisation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("io", "libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("io", "PNG write failed for '" + path.string() + "': " + message);
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()),
                 bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

unsigned quantize_sample(double value, unsigned max_level) noexcept {
    const double clamped = std::clamp(value, 0.0, 1.0);
    return static_cast<unsigned>(std::floor(clamped * max_level + 0.5));
}

GrayImage load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot open '" + path.string() + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) {
        in.close();
        auto img = load_png(path);
        img.set_source_tag(path.string());
        return img;
    }
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5')) {
        auto img = load_pgm(bytes);
        img.set_source_tag(path.string());
        return img;
    }
    throw Error("format", "unsupported image format for '" + path.string() + "' (PGM P2/P5 or PNG expected)");
}

void save_image(const GrayImage& img, const std::filesystem::path& path, int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16) {
        throw Error("bit_depth", "bit depth must be 8 or 16, got " + std::to_string(bit_depth));
    }
    const std::string ext = lower_extension(path);
    if (ext == ".pgm") {
        save_pgm(img, path, bit_depth);
    } else if (ext == ".png") {
        save_png(img, path, bit_depth);
    } else {
        throw Error("format", "unsupported output extension '" + ext + "' (use .pgm or .png)");
    }
}

}  // namespace corescale
