#include "sgqc/pgm.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <vector>

namespace sgqc {

void write_pgm(const std::string& path, const Tensor<float>& image) {
    if (image.rank() != 3 || image.dim(2) != 1)
        throw ShapeError("write_pgm expects an HxWx1 image, got " + shape_str(image.shape()));
    const int h = image.dim(0), w = image.dim(1);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << "P5\n" << w << " " << h << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(w));
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            float v = image.at(i, j, 0);
            v = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
            row[static_cast<std::size_t>(j)] =
                static_cast<unsigned char>(std::lround(v * 255.0f));
        }
        os.write(reinterpret_cast<const char*>(row.data()), w);
    }
    if (!os) throw IoError("failed writing image: " + path);
}

namespace {

// Next whitespace-separated token, skipping '#' comment lines.
int next_pgm_int(std::ifstream& is, const std::string& path) {
    int c = is.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = is.get();
        } else if (std::isspace(c)) {
            c = is.get();
        } else {
            break;
        }
    }
    if (c == EOF || !std::isdigit(c)) throw IoError("malformed PGM header in " + path);
    int value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        c = is.get();
    }
    return value;
}

}  // namespace

Tensor<float> read_pgm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open image: " + path);
    char magic[2];
    is.read(magic, 2);
    if (is.gcount() != 2 || magic[0] != 'P' || magic[1] != '5')
        throw IoError("not a binary PGM (P5) file: " + path);
    const int w = next_pgm_int(is, path);
    const int h = next_pgm_int(is, path);
    const int maxval = next_pgm_int(is, path);
    if (w < 1 || h < 1 || maxval < 1 || maxval > 255)
        throw IoError("unsupported PGM geometry in " + path);
    std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h);
    is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(is.gcount()) != bytes.size())
        throw IoError("truncated PGM data in " + path);
    Tensor<float> img({h, w, 1});
    for (std::size_t i = 0; i < bytes.size(); ++i)
        img[i] = static_cast<float>(bytes[i]) / static_cast<float>(maxval);
    return img;
}

}  // namespace sgqc
