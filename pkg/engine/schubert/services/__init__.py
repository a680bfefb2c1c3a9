# Combinatorial and numerical services
