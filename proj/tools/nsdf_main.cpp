#include <cstdio>

int main(int argc, char** argv) {
  (void)argc;
  (void)argv;
  std::puts("nsdf: command-line interface under construction");
  return 1;
}
