# Nested-interval construction engine