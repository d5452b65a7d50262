#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "msgfem/common.hpp"

int main(int argc, char** argv) {
  msgfem::init_threading();
  return doctest::Context(argc, argv).run();
}
