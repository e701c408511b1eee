// External-command fixture. Reads the input from argv[1] (or stdin), records
// one edge per pair of adjacent bytes and writes the map to $GRAMFUZZ_COV_FILE.
//   CRASH...  raises SIGSEGV
//   HANG...   spins forever
//   NOCOV...  exits without writing coverage
//   SHORT...  writes a truncated map

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  std::string in;
  if (argc > 1) {
    std::ifstream f(argv[1], std::ios::binary);
    in.assign(std::istreambuf_iterator<char>(f), {});
  } else {
    in.assign(std::istreambuf_iterator<char>(std::cin), {});
  }
  auto starts = [&](const char* p) { return in.rfind(p, 0) == 0; };
  if (starts("CRASH")) std::raise(SIGSEGV);
  static volatile int spin = 1;
  if (starts("HANG"))
    while (spin) {
    }

  const char* path = std::getenv("GRAMFUZZ_COV_FILE");
  if (!path || starts("NOCOV")) return 0;
  std::vector<unsigned char> map(65536, 0);
  unsigned prev = 0;
  for (unsigned char c : in) {
    unsigned cur = 1000u + c * 97u;
    unsigned char& cell = map[(cur ^ (prev >> 1)) % 65536];
    if (cell != 255) ++cell;
    prev = cur;
  }
  std::FILE* f = std::fopen(path, "wb");
  if (!f) return 3;
  std::size_t n = starts("SHORT") ? 100 : map.size();
  std::fwrite(map.data(), 1, n, f);
  std::fclose(f);
  return 0;
}
