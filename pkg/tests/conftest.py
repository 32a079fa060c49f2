from hypothesis import settings

settings.register_profile("qdouble", deadline=None, max_examples=40)
settings.load_profile("qdouble")
