# Test package for semtree
