#include <doctest.h>

#include "core/types.hpp"

TEST_CASE("dataset carries its shape") {
  using namespace kronmtl;
  Dataset d = make_dataset(Matrix::Ones(4, 2), Matrix::Zero(4, 3));
  CHECK(d.n() == 4);
  CHECK(d.d() == 2);
  CHECK(d.k() == 3);
}
