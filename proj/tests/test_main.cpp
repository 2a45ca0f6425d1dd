#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include "krcd/parallel.hpp"

int main(int argc, char** argv) {
  krcd::set_thread_count(1);
  doctest::Context context(argc, argv);
  return context.run();
}
