#include <iostream>

#include "support/fixtures.hpp"

int main()
{
    try {
        for (const auto& m : amga::testing::shared_zoo()) {
            std::cout << m.name() << " validation accuracy " << m.clean_accuracy << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }
    return 0;
}
