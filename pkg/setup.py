from setuptools import setup

with open('README.rst') as readme_file:
    readme = readme_file.read()

setup(
    name='acclqr',
    version='0.1.0.dev0',
    description="Accelerated policy optimization for continuous-time LQR",
    long_description=readme + '\n\n',
    author="The acclqr developers",
    package_data={'acclqr': ['py.typed']},
    packages=[
        'acclqr',
    ],
    package_dir={'acclqr': 'acclqr'},
    include_package_data=True,
    license="Apache Software License 2.0",
    zip_safe=False,
    keywords='lqr policy-gradient optimal-control acceleration',
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: Apache Software License',
        'Natural Language :: English',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: 3.12',
        'Topic :: Scientific/Engineering :: Mathematics'
    ],
    install_requires=[
        'numpy>=1.21',
        'PyYAML>=5.1,!=5.4.1',
        'scipy>=1.7',
        'typing_extensions',
        'yatiml>=0.10'
    ],
    entry_points={
        'console_scripts': [
            'acclqr=acclqr.cli:main',
        ],
    }
)
